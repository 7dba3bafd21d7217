#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aclp/bayesnet.hpp"
#include "aclp/dataset.hpp"
#include "aclp/eventlog.hpp"
#include "aclp/experiment.hpp"
#include "aclp/flightgen.hpp"
#include "aclp/fuzzymine.hpp"
#include "aclp/indicators.hpp"
#include "aclp/jsonio.hpp"
#include "aclp/mag.hpp"
#include "aclp/smmb.hpp"

namespace {

using namespace aclp;

std::string now_iso() { return format_timestamp(static_cast<Timestamp>(std::time(nullptr))); }

BayesNet load_net(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_network(in);
}

EventLog load_log(const std::string& path, const LogFormat& fmt) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_log(in, fmt);
}

DataSet load_data(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_dataset(in);
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// "none" (or empty) means hide nothing.
std::vector<std::string> split_latents(const std::string& s) {
    std::vector<std::string> out;
    if (s.empty() || s == "none") return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

RunManifest start_manifest(const std::string& subcommand,
                           const std::vector<std::string>& argv) {
    RunManifest m;
    m.subcommand = subcommand;
    m.argv = argv;
    m.started = now_iso();
    return m;
}

void finish_manifest(RunManifest m) {
    if (m.outputs.empty()) return;
    m.finished = now_iso();
    write_json_atomic(m.outputs.front() + ".manifest.json", manifest_json(m));
}

void print_eval_table(std::ostream& out, const ExperimentResult& res) {
    out << "latents {";
    for (std::size_t i = 0; i < res.resolved_latents.size(); ++i)
        out << (i ? "," : "") << res.resolved_latents[i];
    out << "}  n " << res.config.sample_size << "  repeats " << res.config.repeats
        << "  target " << res.resolved_target << "\n";
    char line[160];
    out << "dataset   MNC  MNI  MNF  precision  recall  f1\n";
    for (std::size_t i = 0; i < res.repeats.size(); ++i) {
        const auto& rep = res.repeats[i];
        if (!rep.metrics) {
            out << "D" << i + 1 << "  error: " << rep.error << "\n";
            continue;
        }
        const auto& m = *rep.metrics;
        std::snprintf(line, sizeof line, "D%-8zu %4zu %4zu %4zu  %9.7f  %9.7f  %9.7f\n",
                      i + 1, m.mnc, m.mni, m.mnf, m.precision, m.recall, m.f1);
        out << line;
    }
    std::snprintf(line, sizeof line, "mean %30s%9.7f  %9.7f  %9.7f\n", "",
                  res.mean_precision, res.mean_recall, res.mean_f1);
    out << line;
}

int run_cli(const std::vector<std::string>& argv);

void add_sample(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand("sample", "Sample a network into a CSV dataset");
    auto net = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    auto n = std::make_shared<std::size_t>(2500);
    auto seed = std::make_shared<std::uint64_t>(1);
    cmd->add_option("--net", *net, "network file (BIF subset)")->required();
    cmd->add_option("--n", *n, "rows to draw")->capture_default_str();
    cmd->add_option("--seed", *seed, "generator seed")->capture_default_str();
    cmd->add_option("--out", *out, "dataset CSV path")->required();
    cmd->callback([=] {
        auto m = start_manifest("sample", argv);
        m.inputs = {*net};
        m.config = Json{{"n", *n}};
        m.seed = *seed;
        auto data = forward_sample(load_net(*net), *n, *seed);
        std::ostringstream buf;
        write_dataset(buf, data);
        write_text_atomic(*out, buf.str());
        m.outputs = {*out};
        finish_manifest(std::move(m));
    });
}

struct LogFlags {
    std::string case_col = "Case";
    std::string activity_col = "Activity";
    std::string time_col = "Timestamp";
    std::string end_col;

    LogFormat format() const {
        LogFormat fmt;
        fmt.case_col = case_col;
        fmt.activity_col = activity_col;
        fmt.timestamp_col = time_col;
        fmt.end_col = end_col;
        return fmt;
    }
};

std::shared_ptr<LogFlags> add_log_flags(CLI::App* cmd) {
    auto lf = std::make_shared<LogFlags>();
    cmd->add_option("--case-col", lf->case_col, "case id column")->capture_default_str();
    cmd->add_option("--activity-col", lf->activity_col, "activity column")
        ->capture_default_str();
    cmd->add_option("--time-col", lf->time_col, "start timestamp column")
        ->capture_default_str();
    cmd->add_option("--end-col", lf->end_col, "end timestamp column (empty: events are instant)");
    return lf;
}

void add_mine(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand("mine", "Mine a conflict-resolved process model");
    auto log = std::make_shared<std::string>();
    auto lf = add_log_flags(cmd);
    auto cfg = std::make_shared<MiningConfig>();
    auto out_dot = std::make_shared<std::string>();
    auto out_report = std::make_shared<std::string>();
    auto out_model = std::make_shared<std::string>();
    cmd->add_option("--log", *log, "event log CSV")->required();
    cmd->add_option("--preserve", cfg->preserve_threshold, "binary loop preserve threshold")
        ->capture_default_str();
    cmd->add_option("--ratio", cfg->ratio_threshold, "binary exception ratio threshold")
        ->capture_default_str();
    cmd->add_option("--cutoff", cfg->edge_cutoff, "edge utility cutoff")
        ->capture_default_str();
    cmd->add_option("--eps", cfg->nary_similarity_eps, "N-ary similarity tolerance")
        ->capture_default_str();
    cmd->add_option("--max-cycle", cfg->max_cycle_len, "longest N-ary cycle resolved")
        ->capture_default_str();
    cmd->add_option("--out-dot", *out_dot, "model DOT path")->required();
    cmd->add_option("--out-report", *out_report, "conflict report JSON path");
    cmd->add_option("--out-model", *out_model, "model JSON path (feeds indicators/discover)");
    cmd->callback([=] {
        auto m = start_manifest("mine", argv);
        m.inputs = {*log};
        m.config = Json{{"preserve", cfg->preserve_threshold},
                        {"ratio", cfg->ratio_threshold},
                        {"cutoff", cfg->edge_cutoff},
                        {"eps", cfg->nary_similarity_eps},
                        {"max_cycle", cfg->max_cycle_len}};
        auto r = mine(load_log(*log, lf->format()), *cfg);
        write_text_atomic(*out_dot, export_dot(r.model));
        m.outputs = {*out_dot};
        if (!out_report->empty()) {
            write_json_atomic(*out_report, conflict_report_json(r.report));
            m.outputs.push_back(*out_report);
        }
        if (!out_model->empty()) {
            write_json_atomic(*out_model, process_model_json(r.model));
            m.outputs.push_back(*out_model);
        }
        finish_manifest(std::move(m));
    });
}

void add_indicators(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand(
        "indicators", "Compute per-case link durations and the target delay");
    auto log = std::make_shared<std::string>();
    auto lf = add_log_flags(cmd);
    auto model = std::make_shared<std::string>();
    auto tgt = std::make_shared<TargetSpec>();
    auto bins = std::make_shared<int>(3);
    auto out_ind = std::make_shared<std::string>();
    auto out_disc = std::make_shared<std::string>();
    auto out_data = std::make_shared<std::string>();
    auto out_bounds = std::make_shared<std::string>();
    cmd->add_option("--log", *log, "event log CSV")->required();
    cmd->add_option("--model", *model, "mined model JSON")->required();
    cmd->add_option("--from", tgt->from_activity, "activity starting the target link")
        ->required();
    cmd->add_option("--to", tgt->to_activity, "activity ending the target link")->required();
    cmd->add_option("--sched-attr", tgt->sched_attr,
                    "scheduled-time attribute; when set, the target is actual minus scheduled");
    cmd->add_option("--target-name", tgt->name, "target variable name")
        ->capture_default_str();
    cmd->add_option("--bins", *bins, "equal-frequency bins for discretization")
        ->capture_default_str();
    cmd->add_option("--out-ind", *out_ind, "indicator CSV path")->required();
    cmd->add_option("--out-disc", *out_disc, "discretized per-case CSV path");
    cmd->add_option("--out-data", *out_data,
                    "plain integer dataset CSV path (feeds discover)");
    cmd->add_option("--out-bounds", *out_bounds, "bin boundary JSON path");
    cmd->callback([=] {
        auto m = start_manifest("indicators", argv);
        m.inputs = {*log, *model};
        m.config = Json{{"from", tgt->from_activity},
                        {"to", tgt->to_activity},
                        {"sched_attr", tgt->sched_attr},
                        {"target_name", tgt->name},
                        {"bins", *bins}};
        auto table = compute_indicators(load_log(*log, lf->format()),
                                        parse_process_model_json(load_json_file(*model)), *tgt);
        std::ostringstream buf;
        write_indicator_csv(buf, table);
        write_text_atomic(*out_ind, buf.str());
        m.outputs = {*out_ind};
        if (!out_disc->empty() || !out_data->empty() || !out_bounds->empty()) {
            auto disc = discretize(table, *bins);
            if (!out_disc->empty()) {
                std::ostringstream dbuf;
                write_discrete_csv(dbuf, disc);
                write_text_atomic(*out_disc, dbuf.str());
                m.outputs.push_back(*out_disc);
            }
            if (!out_data->empty()) {
                std::ostringstream dbuf;
                write_dataset(dbuf, to_dataset(disc));
                write_text_atomic(*out_data, dbuf.str());
                m.outputs.push_back(*out_data);
            }
            if (!out_bounds->empty()) {
                write_json_atomic(*out_bounds, bounds_json(disc));
                m.outputs.push_back(*out_bounds);
            }
        }
        finish_manifest(std::move(m));
    });
}

void add_discover(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand(
        "discover", "Discover the local causal structure around a target variable");
    auto data = std::make_shared<std::string>();
    auto target = std::make_shared<std::string>();
    auto model = std::make_shared<std::string>();
    auto cap = std::make_shared<std::size_t>(12);
    auto out_json = std::make_shared<std::string>();
    auto out_dot = std::make_shared<std::string>();
    cmd->add_option("--data", *data, "discretized dataset CSV")->required();
    cmd->add_option("--target", *target, "target variable")->required();
    cmd->add_option("--model", *model, "mined model JSON; orients leftover edges");
    cmd->add_option("--cap", *cap, "local search size cap")->capture_default_str();
    cmd->add_option("--out-json", *out_json, "blanket JSON path")->required();
    cmd->add_option("--out-dot", *out_dot, "blanket DOT path");
    cmd->callback([=] {
        auto m = start_manifest("discover", argv);
        m.inputs = {*data};
        m.config = Json{{"target", *target}, {"cap", *cap}};
        auto ds = load_data(*data);
        SllContext ctx(ds, *cap);
        auto mb = smmb(ctx, *target);
        if (!model->empty()) {
            m.inputs.push_back(*model);
            mb = orient_with_process_order(
                mb, topological_order(parse_process_model_json(load_json_file(*model))));
        }
        write_json_atomic(*out_json, mb_json(mb));
        m.outputs = {*out_json};
        if (!out_dot->empty()) {
            write_text_atomic(*out_dot, mb_dot(mb));
            m.outputs.push_back(*out_dot);
        }
        finish_manifest(std::move(m));
    });
}

void add_eval(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand(
        "eval", "Run the hide-and-recover blanket experiment on a network");
    auto net = std::make_shared<std::string>();
    auto latents = std::make_shared<std::string>("none");
    auto cfg = std::make_shared<ExperimentConfig>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--net", *net, "network file (BIF subset)")->required();
    cmd->add_option("--latents", *latents, "comma-separated latents, or 'none'")
        ->capture_default_str();
    cmd->add_option("--n", cfg->sample_size, "rows per repeat")->capture_default_str();
    cmd->add_option("--repeats", cfg->repeats, "independent datasets")->capture_default_str();
    cmd->add_option("--target", cfg->target, "target variable or alias")
        ->capture_default_str();
    cmd->add_option("--seed", cfg->seed, "seed of the first repeat")->capture_default_str();
    cmd->add_option("--jobs", cfg->jobs, "worker threads across repeats")
        ->capture_default_str();
    cmd->add_option("--significance", cfg->significance, "recorded alpha")
        ->capture_default_str();
    cmd->add_option("--out", *out, "results JSON path");
    cmd->callback([=] {
        auto m = start_manifest("eval", argv);
        m.inputs = {*net};
        cfg->latents = split_latents(*latents);
        m.config = Json{{"latents", cfg->latents},
                        {"n", cfg->sample_size},
                        {"repeats", cfg->repeats},
                        {"target", cfg->target},
                        {"jobs", cfg->jobs},
                        {"significance", cfg->significance}};
        m.seed = cfg->seed;
        auto res = run_experiment(load_net(*net), *cfg);
        print_eval_table(std::cout, res);
        if (!out->empty()) {
            write_json_atomic(*out, experiment_json(res));
            m.outputs = {*out};
        }
        finish_manifest(std::move(m));
    });
}

void add_project(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand(
        "project", "Project a network onto its observed variables");
    auto net = std::make_shared<std::string>();
    auto latents = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--net", *net, "network file (BIF subset)")->required();
    cmd->add_option("--latents", *latents, "comma-separated latents, or 'none'")->required();
    cmd->add_option("--out", *out, "graph JSON path")->required();
    cmd->callback([=] {
        auto m = start_manifest("project", argv);
        m.inputs = {*net};
        auto bn = load_net(*net);
        std::set<std::string> hide;
        for (const auto& l : split_latents(*latents)) hide.insert(resolve_alias(bn, l));
        m.config = Json{{"latents", std::vector<std::string>(hide.begin(), hide.end())}};
        write_json_atomic(*out, mag_json(latent_project(bn, hide)));
        m.outputs = {*out};
        finish_manifest(std::move(m));
    });
}

void add_genlog(CLI::App& app, const std::vector<std::string>& argv) {
    auto* cmd = app.add_subcommand(
        "genlog", "Generate a synthetic turnaround event log with known ground truth");
    auto spec = std::make_shared<FlightSpec>();
    auto cases = std::make_shared<std::size_t>(1000);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--cases", *cases, "traces to generate")->capture_default_str();
    cmd->add_option("--seed", *seed, "generator seed")->capture_default_str();
    cmd->add_option("--self-loop", spec->self_loop_prob, "repeated screening probability")
        ->capture_default_str();
    cmd->add_option("--exception", spec->exception_prob, "pushback redo probability")
        ->capture_default_str();
    cmd->add_option("--rework", spec->rework_prob, "full rework probability")
        ->capture_default_str();
    cmd->add_option("--scale", spec->confounder_scale, "latent load scale")
        ->capture_default_str();
    cmd->add_option("--out", *out, "event log CSV path")->required();
    cmd->callback([=] {
        auto m = start_manifest("genlog", argv);
        m.config = Json{{"cases", *cases},
                        {"self_loop", spec->self_loop_prob},
                        {"exception", spec->exception_prob},
                        {"rework", spec->rework_prob},
                        {"scale", spec->confounder_scale}};
        m.seed = *seed;
        std::ostringstream buf;
        serialize_log(buf, generate_flight_log(*spec, *cases, *seed), flight_log_format());
        write_text_atomic(*out, buf.str());
        m.outputs = {*out};
        finish_manifest(std::move(m));
    });
}

void add_replay(CLI::App& app, int& exit_code) {
    auto* cmd = app.add_subcommand("replay", "Re-run a recorded manifest");
    auto path = std::make_shared<std::string>();
    auto check = std::make_shared<bool>(false);
    cmd->add_option("--manifest", *path, "manifest JSON path")->required();
    cmd->add_flag("--check", *check, "fail unless every output is reproduced byte-for-byte");
    cmd->callback([=, &exit_code] {
        auto m = parse_manifest(load_json_file(*path));
        if (m.subcommand == "replay") throw DataError("manifest records a replay; refusing");
        std::map<std::string, std::string> before;
        if (*check)
            for (const auto& out : m.outputs) before[out] = read_bytes(out);
        int rc = run_cli(m.argv);
        if (rc != 0) throw DataError("replayed command failed with exit code " +
                                     std::to_string(rc));
        if (*check) {
            std::vector<std::string> changed;
            for (const auto& out : m.outputs)
                if (read_bytes(out) != before.at(out)) changed.push_back(out);
            if (!changed.empty()) {
                std::string msg = "replay did not reproduce:";
                for (const auto& f : changed) msg += " " + f;
                throw DataError(msg);
            }
            std::cout << "reproduced " << m.outputs.size() << " output(s) byte-for-byte\n";
        }
        exit_code = rc;
    });
}

int run_cli(const std::vector<std::string>& argv) {
    CLI::App app{"Process-mining driven local causal discovery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    app.set_config("--config", "", "INI file with [subcommand] sections setting flag defaults");
    int exit_code = 0;
    add_sample(app, argv);
    add_mine(app, argv);
    add_indicators(app, argv);
    add_discover(app, argv);
    add_eval(app, argv);
    add_project(app, argv);
    add_genlog(app, argv);
    add_replay(app, exit_code);
    // Lets `sub --config file` reach the top-level config option.
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();
    try {
        std::vector<std::string> reversed(argv.rbegin(), argv.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args);
}
