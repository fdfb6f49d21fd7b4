// ctxsense: context determination from smartphone-style IMU and GNSS logs.
//
//   ctxsense simulate  --script scenario.txt --seed 1 --out-prefix data/run
//   ctxsense train     --imu imu.csv --gnss gnss.csv --truth truth.csv --out model.ctx
//   ctxsense run       --model model.ctx --imu imu.csv --gnss gnss.csv --out out.jsonl
//   ctxsense eval      --run out.jsonl --truth truth.csv [--out report.json]
//
// Exit codes: 0 success, 2 input/format error, 3 model error, 4 alignment error.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ctxsense/eval.hpp"
#include "ctxsense/jsonl.hpp"
#include "ctxsense/model_io.hpp"
#include "ctxsense/pipeline.hpp"
#include "ctxsense/synth.hpp"

namespace {

using namespace ctxsense;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error("cannot open input file '" + path + "'");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw format_error("cannot open output file '" + path + "'");
    return out;
}

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
    std::ifstream in = open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("config file '" + path + "': " + e.what());
    }
    if (j.contains("window_s")) cfg.window_s = j["window_s"].get<double>();
    if (j.contains("overlap")) cfg.overlap = j["overlap"].get<double>();
    if (j.contains("train_overlap")) cfg.train_overlap = j["train_overlap"].get<double>();
    if (j.contains("sample_rate")) cfg.sample_rate = j["sample_rate"].get<double>();
    if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
    if (j.contains("cn0_threshold")) cfg.cn0_threshold = j["cn0_threshold"].get<double>();
    if (j.contains("beta")) cfg.beta = j["beta"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mode")) cfg.mode = pipeline_mode_from_name(j["mode"].get<std::string>());
    if (j.contains("routing"))
        cfg.routing = j["routing"].get<std::string>() == "hard" ? Routing::Hard : Routing::Soft;
    if (j.contains("calibration_fraction"))
        cfg.calibration_fraction = j["calibration_fraction"].get<double>();
    if (j.contains("holdout_fraction"))
        cfg.holdout_fraction = j["holdout_fraction"].get<double>();
    if (j.contains("mode_hysteresis"))
        cfg.mode_hysteresis = j["mode_hysteresis"].get<std::size_t>();
    if (j.contains("kernel")) {
        const auto& k = j["kernel"];
        if (k.contains("kind"))
            cfg.kernel.kind =
                k["kind"].get<std::string>() == "linear" ? KernelKind::Linear : KernelKind::Rbf;
        if (k.contains("gamma")) cfg.kernel.gamma = k["gamma"].get<double>();
    }
    if (j.contains("hmm")) {
        const auto& h = j["hmm"];
        if (h.contains("initial")) cfg.hmm3.initial = h["initial"].get<std::vector<double>>();
        if (h.contains("priors"))
            cfg.hmm3.class_priors = h["priors"].get<std::vector<double>>();
    }
}

std::vector<synth::ScenarioSegment> parse_script(const std::string& path) {
    std::ifstream in = open_input(path);
    std::vector<synth::ScenarioSegment> script;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        std::string behavior, environment;
        double duration = 0.0;
        if (!(row >> behavior)) continue;  // blank line
        if (!(row >> environment >> duration))
            throw format_error("script line " + std::to_string(line_no) +
                               ": expected '<behavior> <environment> <seconds>'");
        synth::ScenarioSegment seg;
        seg.behavior = behavior_from_name(behavior);
        seg.environment = environment_from_name(environment);
        seg.duration_s = duration;
        script.push_back(seg);
    }
    if (script.empty()) throw format_error("script '" + path + "' has no segments");
    return script;
}

nlohmann::ordered_json confusion_to_json(const ConfusionReport& rep) {
    nlohmann::ordered_json j;
    j["labels"] = rep.labels;
    j["accuracy"] = rep.accuracy;
    j["total"] = rep.total;
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < rep.counts.rows(); ++r) {
        std::vector<double> row;
        for (std::size_t c = 0; c < rep.counts.cols(); ++c) row.push_back(rep.counts(r, c));
        rows.push_back(std::move(row));
    }
    j["confusion"] = rows;
    nlohmann::ordered_json per_class = nlohmann::ordered_json::array();
    for (const auto& m : rep.per_class) {
        nlohmann::ordered_json c;
        c["label"] = m.label;
        c["precision"] = m.precision;
        c["recall"] = m.recall;
        c["support"] = m.support;
        per_class.push_back(std::move(c));
    }
    j["per_class"] = std::move(per_class);
    return j;
}

nlohmann::ordered_json delays_to_json(const std::vector<TransitionDelay>& delays) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : delays) {
        nlohmann::ordered_json j;
        j["t"] = d.at_t;
        j["to"] = d.to_label;
        j["delay_epochs"] = d.delay_epochs;
        j["matched"] = d.matched;
        arr.push_back(std::move(j));
    }
    return arr;
}

int cmd_simulate(const std::string& script_path, std::uint64_t seed,
                 const std::string& prefix, double rate) {
    const auto script = parse_script(script_path);
    const synth::ScenarioData data = synth::generate_scenario(script, seed, rate);
    {
        auto out = open_output(prefix + "_imu.csv");
        write_imu_log(out, data.imu);
    }
    {
        auto out = open_output(prefix + "_gnss.csv");
        write_gnss_log(out, data.gnss);
    }
    {
        auto out = open_output(prefix + "_truth.csv");
        synth::write_truth_csv(out, data.truth);
    }
    std::cout << "simulated " << data.truth.size() << " s over " << script.size()
              << " segments -> " << prefix << "_{imu,gnss,truth}.csv\n";
    return 0;
}

int cmd_train(const PipelineConfig& cfg, const std::string& imu_path,
              const std::string& gnss_path, const std::string& truth_path,
              const std::string& out_path) {
    ParseOptions popt;
    popt.nominal_rate = cfg.sample_rate;
    auto imu_in = open_input(imu_path);
    const SensorStream imu = parse_imu_log(imu_in, popt);
    auto gnss_in = open_input(gnss_path);
    const GnssEpochSeries gnss = parse_gnss_log(gnss_in, popt);
    auto truth_in = open_input(truth_path);
    const synth::TruthSeries truth = synth::parse_truth_csv(truth_in);

    TrainReport report;
    const ModelBundle model = train_models(imu, gnss, truth, cfg, &report);
    auto out = open_output(out_path);
    save_model(out, model);

    std::cout << "trained on " << report.windows_used << " windows / "
              << report.epochs_used << " epochs\n";
    std::cout << "held-out accuracy: human-vehicle " << report.human_vehicle_accuracy
              << ", human activity " << report.human_activity_accuracy
              << ", vehicle motion " << report.vehicle_motion_accuracy
              << ", environment(3) " << report.environment3_accuracy
              << ", environment(2) " << report.environment2_accuracy << "\n";
    std::cout << "model written to " << out_path << "\n";
    return 0;
}

int cmd_run(const PipelineConfig& cfg, const std::string& model_path,
            const std::string& imu_path, const std::string& gnss_path,
            const std::string& out_path) {
    auto model_in = open_input(model_path);
    const ModelBundle model = load_model(model_in);

    std::optional<SensorStream> imu;
    std::optional<GnssEpochSeries> gnss;
    ParseOptions popt;
    popt.nominal_rate = model.sample_rate;
    if (!imu_path.empty()) {
        auto in = open_input(imu_path);
        imu = parse_imu_log(in, popt);
    }
    if (!gnss_path.empty()) {
        auto in = open_input(gnss_path);
        gnss = parse_gnss_log(in, popt);
    }
    if (!imu && !gnss) throw format_error("run needs at least one of --imu / --gnss");

    const auto records = run_pipeline(model, imu ? &*imu : nullptr,
                                      gnss ? &*gnss : nullptr, cfg);
    auto out = open_output(out_path);
    write_records_jsonl(out, records);
    std::cout << records.size() << " records -> " << out_path << "\n";
    return 0;
}

int cmd_eval(const std::string& run_path, const std::string& truth_path,
             const std::string& report_path) {
    auto run_in = open_input(run_path);
    const auto records = read_records_jsonl(run_in);
    auto truth_in = open_input(truth_path);
    const synth::TruthSeries truth = synth::parse_truth_csv(truth_in);

    const EvalReport rep = evaluate(records, truth);

    nlohmann::ordered_json j;
    j["behavior"] = confusion_to_json(rep.behavior);
    j["behavior_groups"] = confusion_to_json(rep.groups);
    j["environment"] = confusion_to_json(rep.environment);
    j["behavior_delays"] = delays_to_json(rep.behavior_delays);
    j["environment_delays"] = delays_to_json(rep.environment_delays);
    j["mean_behavior_delay"] = rep.mean_behavior_delay;
    j["mean_environment_delay"] = rep.mean_environment_delay;
    j["mean_delay"] = rep.mean_delay;

    if (!report_path.empty()) {
        auto out = open_output(report_path);
        out << j.dump(2) << '\n';
    }
    std::cout << "behaviour accuracy " << rep.behavior.accuracy << " ("
              << rep.behavior.total << " epochs), group accuracy " << rep.groups.accuracy
              << ", environment accuracy " << rep.environment.accuracy << " ("
              << rep.environment.total << " epochs)\n";
    std::cout << "mean transition delay " << rep.mean_delay << " epochs (behaviour "
              << rep.mean_behavior_delay << ", environment " << rep.mean_environment_delay
              << ")\n";
    if (report_path.empty()) std::cout << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"context determination from IMU and GNSS logs"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    std::string config_path;
    std::uint64_t seed = 1;
    std::string mode = "pedestrian";
    app.add_option("--config", config_path, "JSON config file")->capture_default_str();
    app.add_option("--seed", seed, "seed for corpus generation and training splits")
        ->capture_default_str();
    app.add_option("--mode", mode, "pedestrian|vehicle|auto")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "generate a synthetic scenario corpus");
    std::string script_path, out_prefix;
    double sim_rate = 100.0;
    sim->add_option("--script", script_path,
                    "scenario script: one '<behavior> <environment> <seconds>' per line")
        ->required();
    sim->add_option("--out-prefix", out_prefix, "output path prefix")->required();
    sim->add_option("--rate", sim_rate, "IMU sample rate in Hz")->capture_default_str();

    auto* train = app.add_subcommand("train", "train classifiers from labeled logs");
    std::string imu_path, gnss_path, truth_path, model_path, out_path;
    train->add_option("--imu", imu_path, "IMU CSV log")->required();
    train->add_option("--gnss", gnss_path, "GNSS CSV log")->required();
    train->add_option("--truth", truth_path, "truth CSV")->required();
    train->add_option("--out", out_path, "model file to write")->required();

    auto* run = app.add_subcommand("run", "run the full pipeline over logs");
    run->add_option("--model", model_path, "model file")->required();
    run->add_option("--imu", imu_path, "IMU CSV log");
    run->add_option("--gnss", gnss_path, "GNSS CSV log");
    run->add_option("--out", out_path, "JSON-lines output")->required();

    auto* eval = app.add_subcommand("eval", "score a run against truth");
    std::string run_path, report_path;
    eval->add_option("--run", run_path, "JSON-lines run output")->required();
    eval->add_option("--truth", truth_path, "truth CSV")->required();
    eval->add_option("--out", report_path, "JSON report file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineConfig cfg;
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        // Explicit flags override the config file.
        if (app.count("--seed") || cfg.seed == 0) cfg.seed = seed;
        if (app.count("--mode")) cfg.mode = pipeline_mode_from_name(mode);

        if (sim->parsed()) return cmd_simulate(script_path, seed, out_prefix, sim_rate);
        if (train->parsed()) return cmd_train(cfg, imu_path, gnss_path, truth_path, out_path);
        if (run->parsed()) return cmd_run(cfg, model_path, imu_path, gnss_path, out_path);
        if (eval->parsed()) return cmd_eval(run_path, truth_path, report_path);
    } catch (const alignment_error& e) {
        std::cerr << "alignment error: " << e.what() << "\n";
        return 4;
    } catch (const model_error& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return 3;
    } catch (const format_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const corrupt_input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
