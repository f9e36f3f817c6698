// pnd: command-line driver for the pump-and-dump pipeline.
//
//   pnd simulate  --out DIR [--seed N] [--set synth.n_coins=50]
//   pnd ingest    --candles F [--ticks F] [--announcements F] [--coins F] --out DIR
//   pnd featurize --candles F --coins F --announcements F --out DIR
//   pnd train     --dataset F --preset rf1 --out DIR
//   pnd evaluate  --model F --dataset F --out DIR
//   pnd backtest  --model F --dataset F --candles F --out DIR | --positions F --out DIR
//
// Settings come from --config (key = value text), then the flags.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pnd/backtest.hpp"
#include "pnd/eval.hpp"
#include "pnd/events.hpp"
#include "pnd/features.hpp"
#include "pnd/forest.hpp"
#include "pnd/glm.hpp"
#include "pnd/market_data.hpp"
#include "pnd/model_io.hpp"
#include "pnd/run_config.hpp"
#include "pnd/synth.hpp"

#ifndef PND_VERSION
#define PND_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace pnd {
namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool force = false;
    std::string out;
    std::vector<std::string> sets;
    std::map<std::string, std::string> paths;  // flag name -> value
};

// Keys that never affect results and stay out of the config hash.
const std::set<std::string> kRunKeys = {"threads", "out", "force"};

const std::set<std::string> kPlausibilityKeys = {
    "plausibility.time_tolerance", "plausibility.volume_multiple",
    "plausibility.price_multiple", "plausibility.volume_lookback_hours"};

RunConfig assemble(const CommonFlags& f) {
    RunConfig cfg = f.config.empty() ? RunConfig{} : RunConfig::load(f.config);
    for (const auto& [key, value] : f.paths)
        if (!value.empty()) cfg.set(key, value);
    if (f.seed) cfg.set("seed", std::to_string(*f.seed));
    if (f.threads) cfg.set("threads", std::to_string(*f.threads));
    if (!f.out.empty()) cfg.set("out", f.out);
    for (const auto& s : f.sets) cfg.set_assignment(s);
    return cfg;
}

unsigned threads_of(const RunConfig& cfg) {
    auto n = cfg.get_u64("threads", 1);
    if (n < 1 || n > 1024) throw UsageError("threads must be in [1, 1024]");
    return static_cast<unsigned>(n);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    return in;
}

class OutputDir {
public:
    explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

    // Writes through a string buffer so the checksum matches the bytes on disk.
    template <class Fn>
    void write(const std::string& name, Fn&& fn) {
        std::ostringstream ss;
        fn(ss);
        std::string bytes = ss.str();
        std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + (dir_ / name).string());
        f << bytes;
        if (!f) throw DataError("write failed for " + (dir_ / name).string());
        outputs_.emplace_back(name, hex64(fnv1a64(bytes)));
    }

    void write_manifest(const std::string& command, const RunConfig& cfg,
                        const std::vector<std::string>& input_keys) {
        json m;
        m["tool"] = "pnd";
        m["version"] = PND_VERSION;
        m["model_format_version"] = kModelFormatVersion;
        m["command"] = command;
        m["seed"] = cfg.get_u64("seed", 1);
        m["config_hash"] = hex64(fnv1a64(cfg.canonical(kRunKeys)));
        json settings = json::object();
        for (const auto& [k, v] : cfg.values())
            if (!kRunKeys.count(k)) settings[k] = v;
        m["config"] = settings;
        json inputs = json::array();
        for (const auto& key : input_keys) {
            auto path = cfg.get(key);
            if (!path) continue;
            inputs.push_back({{"name", key},
                              {"file", fs::path(*path).filename().string()},
                              {"fnv1a64", hex64(fnv1a64(read_file(*path)))}});
        }
        m["inputs"] = inputs;
        json outputs = json::array();
        for (const auto& [name, sum] : outputs_) outputs.push_back({{"file", name}, {"fnv1a64", sum}});
        m["outputs"] = outputs;
        std::ofstream f(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
        f << m.dump(2) << '\n';
        if (!f) throw DataError("cannot write manifest.json");
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> outputs_;
};

PlausibilityConfig plausibility_of(const RunConfig& cfg) {
    PlausibilityConfig p;
    p.time_tolerance = static_cast<EpochSeconds>(
        cfg.get_u64("plausibility.time_tolerance", static_cast<std::uint64_t>(p.time_tolerance)));
    p.volume_multiple = cfg.get_double("plausibility.volume_multiple", p.volume_multiple);
    p.price_multiple = cfg.get_double("plausibility.price_multiple", p.price_multiple);
    p.volume_lookback_hours = static_cast<int>(cfg.get_u64(
        "plausibility.volume_lookback_hours", static_cast<std::uint64_t>(p.volume_lookback_hours)));
    return p;
}

std::set<std::string> with(std::set<std::string> base, const std::set<std::string>& more) {
    base.insert(more.begin(), more.end());
    return base;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const RunConfig& cfg) {
    cfg.check_keys(with({"candles", "ticks", "announcements", "coins", "seed", "threads", "out"},
                        kPlausibilityKeys));
    OutputDir out(cfg.require("out"));
    auto in = open_input(cfg.require("candles"));
    auto series = parse_candles(in);
    if (series.empty()) throw DataError("candle file holds no rows");

    std::size_t total_gaps = 0;
    out.write("validation.csv", [&](std::ostream& os) {
        os << "coin,exchange,candles,span_hours,gaps,missing_hours,zero_volume_runs,breaches\n";
        for (const auto& s : series) {
            auto r = validate_series(s);
            total_gaps += r.gaps.size();
            os << r.coin << ',' << r.exchange << ',' << r.candle_count << ',' << r.span_hours << ','
               << r.gaps.size() << ',' << r.missing_hours() << ',' << r.zero_volume_runs.size()
               << ',' << r.breaches.size() << '\n';
        }
    });
    std::cout << "candles: " << series.size() << " markets, " << total_gaps << " gaps\n";

    if (auto p = cfg.get("ticks")) {
        auto tin = open_input(*p);
        auto ticks = parse_ticks(tin);
        std::size_t n = 0;
        for (const auto& t : ticks) n += t.ticks.size();
        std::cout << "ticks: " << ticks.size() << " markets, " << n << " trades\n";
    }
    if (auto p = cfg.get("coins")) {
        auto cin_ = open_input(*p);
        std::cout << "coins: " << parse_coin_meta(cin_).size() << '\n';
    }
    if (auto p = cfg.get("announcements")) {
        auto ain = open_input(*p);
        auto ann = parse_announcements(ain);
        auto events = dedup_events(ann);
        CandleStore store(series);
        auto pc = plausibility_of(cfg);
        std::size_t accepted = 0;
        out.write("events.jsonl", [&](std::ostream& os) { write_events(os, events); });
        out.write("plausibility.csv", [&](std::ostream& os) {
            os << "event_id,time_plausible,volume_spike,price_spike,accepted\n";
            for (const auto& e : events) {
                const CandleSeries* s = store.find(e.coin, e.exchange);
                PlausibilityVerdict v;
                if (s) v = plausibility_check(e, *s, pc);
                accepted += v.accepted;
                os << make_event_id(e) << ',' << v.time_plausible << ',' << v.volume_spike << ','
                   << v.price_spike << ',' << v.accepted << '\n';
            }
        });
        std::cout << "announcements: " << ann.size() << ", events after dedup: " << events.size()
                  << ", plausible: " << accepted << '\n';
    }
    out.write_manifest("ingest", cfg, {"candles", "ticks", "announcements", "coins"});
    return 0;
}

// ---------------------------------------------------------------- featurize

std::vector<PumpEvent> load_events(const RunConfig& cfg) {
    if (auto p = cfg.get("announcements")) {
        auto in = open_input(*p);
        auto ann = parse_announcements(in);
        return dedup_events(ann);
    }
    if (auto p = cfg.get("events")) {
        auto in = open_input(*p);
        return parse_events(in);
    }
    throw UsageError("featurize needs 'announcements' or 'events'");
}

int cmd_featurize(const RunConfig& cfg) {
    cfg.check_keys(with({"candles", "coins", "announcements", "events", "seed", "threads", "out",
                         "split_first", "split_second", "split_auto", "plausibility_filter"},
                        kPlausibilityKeys));
    const unsigned threads = threads_of(cfg);
    OutputDir out(cfg.require("out"));
    auto cin_ = open_input(cfg.require("candles"));
    CandleStore store(parse_candles(cin_));
    auto min_ = open_input(cfg.require("coins"));
    auto metas = parse_coin_meta(min_);
    auto events = load_events(cfg);
    if (events.empty()) throw DataError("no events after dedup");

    std::size_t implausible = 0;
    if (cfg.get_bool("plausibility_filter", true)) {
        events = filter_plausible(events, store, plausibility_of(cfg), &implausible);
        if (events.empty()) throw DataError("no events pass the plausibility check");
    }

    std::vector<std::vector<CoinMeta>> universe;
    universe.reserve(events.size());
    for (const auto& e : events) universe.push_back(universe_for(e, metas));
    DatasetReport report;
    Dataset ds = build_dataset(events, universe, store, &report, threads);
    if (ds.size() == 0) throw DataError("every event was dropped; dataset is empty");

    out.write("dataset.csv", [&](std::ostream& os) { write_dataset(os, ds); });
    out.write("dropped.csv", [&](std::ostream& os) {
        os << "event_id,reason\n";
        for (const auto& d : report.dropped) os << d.event_id << ',' << d.reason << '\n';
    });

    std::optional<std::pair<EpochSeconds, EpochSeconds>> bounds;
    if (cfg.has("split_first") || cfg.has("split_second"))
        bounds = {parse_iso8601(cfg.require("split_first")),
                  parse_iso8601(cfg.require("split_second"))};
    else if (cfg.get_bool("split_auto", false))
        bounds = rank_split_bounds(events);
    if (bounds) {
        auto parts = chrono_split(ds, bounds->first, bounds->second);
        const char* names[3] = {"train.csv", "validation.csv", "test.csv"};
        for (std::size_t k = 0; k < 3; ++k)
            out.write(names[k], [&](std::ostream& os) { write_dataset(os, parts[k]); });
        std::cout << "split at " << format_iso8601(bounds->first) << " / "
                  << format_iso8601(bounds->second) << ": train " << parts[0].size()
                  << ", validation " << parts[1].size() << ", test " << parts[2].size() << '\n';
    }
    std::cout << "observations " << ds.size() << " positives " << ds.positives() << " events "
              << events.size() - report.dropped.size() << " dropped " << report.dropped.size()
              << " implausible " << implausible << '\n';
    out.write_manifest("featurize", cfg, {"candles", "coins", "announcements", "events"});
    return 0;
}

// ---------------------------------------------------------------- train

const std::set<std::string> kModelKeys = {"preset", "n_trees", "n_true_per_tree",
                                          "n_false_per_tree", "mtry", "min_leaf", "max_depth",
                                          "lambda", "tolerance", "max_iterations"};

bool is_forest_preset(const std::string& preset) { return preset.rfind("rf", 0) == 0; }

RFConfig forest_config(const RunConfig& cfg) {
    std::string preset = cfg.get_string("preset", "rf1");
    RFConfig rf;
    if (preset == "rf1")
        rf = RFConfig::rf1();
    else if (preset == "rf2")
        rf = RFConfig::rf2();
    else if (preset == "rf3")
        rf = RFConfig::rf3();
    else if (preset != "rf")
        throw UsageError("unknown preset '" + preset + "' (rf1|rf2|rf3|rf|glm1|glm2|glm3|glm)");
    rf.n_trees = cfg.get_u64("n_trees", rf.n_trees);
    rf.n_true_per_tree = cfg.get_u64("n_true_per_tree", rf.n_true_per_tree);
    rf.n_false_per_tree = cfg.get_u64("n_false_per_tree", rf.n_false_per_tree);
    rf.mtry = cfg.get_u64("mtry", rf.mtry);
    rf.min_leaf = cfg.get_u64("min_leaf", rf.min_leaf);
    if (cfg.has("max_depth")) rf.max_depth = static_cast<int>(cfg.get_u64("max_depth", 0));
    rf.seed = cfg.get_u64("seed", 1);
    rf.validate();
    return rf;
}

GlmConfig glm_config(const RunConfig& cfg) {
    std::string preset = cfg.get_string("preset", "glm1");
    GlmConfig g;
    if (preset == "glm1")
        g = GlmConfig::glm1();
    else if (preset == "glm2")
        g = GlmConfig::glm2();
    else if (preset == "glm3")
        g = GlmConfig::glm3();
    else if (preset != "glm")
        throw UsageError("unknown preset '" + preset + "' (rf1|rf2|rf3|rf|glm1|glm2|glm3|glm)");
    g.lambda = cfg.get_double("lambda", g.lambda);
    g.tolerance = cfg.get_double("tolerance", g.tolerance);
    g.max_iterations = static_cast<int>(cfg.get_u64("max_iterations", static_cast<std::uint64_t>(g.max_iterations)));
    g.seed = cfg.get_u64("seed", 1);
    g.validate();
    return g;
}

Dataset load_dataset(const RunConfig& cfg) {
    auto in = open_input(cfg.require("dataset"));
    return read_dataset(in);
}

int cmd_train(const RunConfig& cfg) {
    cfg.check_keys(with({"dataset", "seed", "threads", "out"}, kModelKeys));
    const unsigned threads = threads_of(cfg);
    std::string preset = cfg.get_string("preset", "rf1");
    // Resolve the model settings before touching any data so config errors
    // exit as usage errors.
    std::optional<RFConfig> rf;
    std::optional<GlmConfig> glm;
    if (is_forest_preset(preset))
        rf = forest_config(cfg);
    else
        glm = glm_config(cfg);

    Dataset ds = load_dataset(cfg);
    std::size_t pos = ds.positives();
    if (pos == 0 || pos == ds.size())
        throw DataError("training data must contain both classes (" + std::to_string(pos) +
                        " positives of " + std::to_string(ds.size()) + ")");
    OutputDir out(cfg.require("out"));
    const auto& names = feature_names();

    if (rf) {
        std::cout << "preset " << preset << ": n_true_per_tree=" << rf->n_true_per_tree
                  << " n_false_per_tree=" << rf->n_false_per_tree << " n_trees=" << rf->n_trees
                  << " mtry=" << rf->mtry << '\n';
        Forest forest = train_forest(ds, *rf, threads);
        out.write("model.json", [&](std::ostream& os) { write_model(os, Model(forest)); });
        auto imp = forest.feature_importance();
        std::vector<std::size_t> order(kFeatureCount);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
        out.write("importance.csv", [&](std::ostream& os) {
            os << "rank,feature,mean_decrease_gini\n";
            for (std::size_t r = 0; r < order.size(); ++r)
                os << r + 1 << ',' << names[order[r]] << ',' << format_decimal(imp[order[r]]) << '\n';
        });
        std::cout << "trained " << forest.trees.size() << " trees; top feature "
                  << names[order[0]] << '\n';
    } else {
        std::cout << "preset " << preset << ": lambda=" << format_decimal(glm->lambda) << '\n';
        GlmModel model;
        try {
            model = fit_lasso_logit(ds, *glm);
        } catch (const ConvergenceError& e) {
            throw ModelError(std::string(e.what()));
        }
        out.write("model.json", [&](std::ostream& os) { write_model(os, Model(model)); });
        out.write("coefficients.csv", [&](std::ostream& os) {
            os << "feature,coefficient\n";
            os << "(Intercept)," << format_decimal(model.intercept) << '\n';
            for (std::size_t j = 0; j < kFeatureCount; ++j) {
                os << names[j] << ',';
                if (model.coefficients[j] == 0.0)
                    os << '-';
                else
                    os << format_decimal(model.coefficients[j]);
                os << '\n';
            }
        });
        std::cout << "selected " << model.active_set.size() << " of " << kFeatureCount
                  << " features in " << model.iterations << " iterations\n";
    }
    out.write_manifest("train", cfg, {"dataset"});
    return 0;
}

// ---------------------------------------------------------------- evaluate

Model load_model(const RunConfig& cfg) {
    auto in = open_input(cfg.require("model"));
    return read_model(in);
}

int cmd_evaluate(const RunConfig& cfg) {
    cfg.check_keys({"model", "dataset", "seed", "threads", "out", "threshold", "sweep_step"});
    const unsigned threads = threads_of(cfg);
    double threshold = cfg.get_double("threshold", 0.3);
    double step = cfg.get_double("sweep_step", 0.01);
    if (!(step > 0 && step <= 1)) throw UsageError("sweep_step must be in (0, 1]");
    Model model = load_model(cfg);
    Dataset ds = load_dataset(cfg);
    std::size_t pos = ds.positives();
    if (pos == 0 || pos == ds.size())
        throw DataError("evaluation data must contain both classes");

    auto scores = predict_all(model, ds, threads);
    // std::vector<bool> is packed, so labels live in a plain array.
    auto labels = std::make_unique<bool[]>(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) labels[i] = ds.observations[i].label;
    std::span<const bool> lab(labels.get(), ds.size());

    double auc = roc_auc(lab, scores);
    auto curve = threshold_sweep(lab, scores, step);
    auto cm = confusion(lab, scores, threshold);
    auto prf = precision_recall_f1(cm);

    OutputDir out(cfg.require("out"));
    out.write("sweep.csv", [&](std::ostream& os) { write_threshold_report(os, curve, auc); });
    out.write("scores.csv", [&](std::ostream& os) {
        os << "event_id,coin,label,score\n";
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const auto& o = ds.observations[i];
            os << o.event_id << ',' << o.coin << ',' << (o.label ? 1 : 0) << ','
               << format_decimal(scores[i]) << '\n';
        }
    });
    out.write("summary.json", [&](std::ostream& os) {
        json j;
        j["observations"] = ds.size();
        j["positives"] = pos;
        j["auc"] = auc;
        j["threshold"] = threshold;
        j["confusion"] = {{"tp", cm.tp}, {"fp", cm.fp}, {"fn", cm.fn}, {"tn", cm.tn}};
        j["precision"] = prf.precision ? json(*prf.precision) : json();
        j["recall"] = prf.recall;
        j["f1"] = prf.f1 ? json(*prf.f1) : json();
        os << j.dump(2) << '\n';
    });
    std::cout << "auc " << format_decimal(auc) << " at n=" << ds.size() << " (" << pos
              << " positives); threshold " << format_decimal(threshold) << ": tp " << cm.tp
              << " fp " << cm.fp << " fn " << cm.fn << " tn " << cm.tn << '\n';
    out.write_manifest("evaluate", cfg, {"model", "dataset"});
    return 0;
}

// ---------------------------------------------------------------- backtest

int cmd_backtest(const RunConfig& cfg) {
    cfg.check_keys({"model", "dataset", "candles", "positions", "seed", "threads", "out",
                    "threshold", "baseline_qty", "gain_haircut", "fee_rate"});
    StrategyConfig sc;
    sc.threshold = cfg.get_double("threshold", sc.threshold);
    sc.baseline_qty = cfg.get_double("baseline_qty", sc.baseline_qty);
    sc.gain_haircut = cfg.get_double("gain_haircut", sc.gain_haircut);
    sc.fee_rate = cfg.get_double("fee_rate", sc.fee_rate);
    sc.validate();

    BacktestReport report;
    std::vector<std::string> inputs;
    if (auto p = cfg.get("positions")) {
        if (cfg.has("model") || cfg.has("dataset"))
            throw UsageError("positions replaces model and dataset; give one or the other");
        auto in = open_input(*p);
        auto positions = parse_positions(in, sc);
        std::erase_if(positions, [&](const Position& pos) { return pos.vote < sc.threshold; });
        report = summarize(std::move(positions), sc);
        inputs = {"positions"};
    } else {
        const unsigned threads = threads_of(cfg);
        Model model = load_model(cfg);
        Dataset ds = load_dataset(cfg);
        auto cin_ = open_input(cfg.require("candles"));
        CandleStore store(parse_candles(cin_));
        auto scores = predict_all(model, ds, threads);
        auto events = group_votes(ds, scores);
        report = run_strategy(events, store, sc);
        inputs = {"model", "dataset", "candles"};
    }
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';

    OutputDir out(cfg.require("out"));
    out.write("backtest.csv", [&](std::ostream& os) { write_backtest_csv(os, report); });
    out.write("summary.json", [&](std::ostream& os) { write_backtest_summary(os, report, sc); });
    if (report.no_trades()) {
        std::cout << "no trades at threshold " << format_decimal(sc.threshold) << '\n';
    } else {
        std::cout << report.positions.size() << " trades: invested "
                  << format_decimal(report.total_invested) << " BTC, gained "
                  << format_decimal(report.total_gained) << " BTC, return "
                  << format_decimal(*report.return_ratio) << ", fee drag "
                  << format_decimal(report.fee_drag) << " BTC\n";
    }
    out.write_manifest("backtest", cfg, inputs);
    return 0;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg, bool force) {
    cfg.check_keys({"seed", "threads", "out"}, {"synth."});
    const unsigned threads = threads_of(cfg);
    SynthConfig sc;
    for (const auto& [key, value] : cfg.values())
        if (key.rfind("synth.", 0) == 0) apply_synth_setting(sc, key.substr(6), value);
    sc.seed = cfg.get_u64("seed", 1);
    sc.validate();

    fs::path dir = cfg.require("out");
    if (fs::exists(dir) && !fs::is_directory(dir))
        throw UsageError(dir.string() + " exists and is not a directory");
    if (fs::exists(dir) && !fs::is_empty(dir) && !force)
        throw UsageError(dir.string() + " is not empty; pass --force to overwrite");

    Scenario scenario = gen_scenario(sc, threads);
    OutputDir out(dir);
    out.write("candles.csv", [&](std::ostream& os) { write_candles(os, scenario.candles); });
    out.write("ticks.csv", [&](std::ostream& os) { write_ticks(os, scenario.ticks); });
    out.write("announcements.jsonl",
              [&](std::ostream& os) { write_announcements(os, scenario.announcements); });
    out.write("coins.jsonl", [&](std::ostream& os) { write_coin_meta(os, scenario.coins); });
    out.write("ground_truth.jsonl",
              [&](std::ostream& os) { write_ground_truth(os, scenario.ground_truth); });
    std::cout << "scenario seed " << sc.seed << ": " << scenario.coins.size() << " coins, "
              << sc.hours << " hours, " << scenario.ground_truth.size() << " events, "
              << scenario.announcements.size() << " announcements\n";
    out.write_manifest("simulate", cfg, {});
    return 0;
}

void add_common(CLI::App* sub, CommonFlags& f, std::initializer_list<const char*> path_flags) {
    sub->add_option("--config", f.config, "key = value settings file");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--threads", f.threads, "worker threads (results do not depend on it)");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--set", f.sets, "override a setting, key=value (repeatable)");
    for (const char* name : path_flags) {
        std::string key = name;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        sub->add_option(flag, f.paths[key], key);
    }
}

}  // namespace
}  // namespace pnd

int main(int argc, char** argv) {
    using namespace pnd;
    CLI::App app{"Pump-and-dump analytics pipeline"};
    app.set_version_flag("--version", PND_VERSION);
    app.require_subcommand(1);

    CommonFlags f;
    auto* ingest = app.add_subcommand("ingest", "parse and validate input files");
    add_common(ingest, f, {"candles", "ticks", "announcements", "coins"});
    auto* featurize = app.add_subcommand("featurize", "build the labelled feature dataset");
    add_common(featurize, f, {"candles", "coins", "announcements", "events", "split_first", "split_second"});
    auto* train = app.add_subcommand("train", "train a forest or LASSO-logit model");
    add_common(train, f, {"dataset", "preset"});
    auto* evaluate = app.add_subcommand("evaluate", "score a dataset and sweep thresholds");
    add_common(evaluate, f, {"model", "dataset", "threshold"});
    auto* backtest = app.add_subcommand("backtest", "run the vote-weighted trading strategy");
    add_common(backtest, f, {"model", "dataset", "candles", "positions", "threshold", "baseline_qty",
                             "gain_haircut", "fee_rate"});
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic scenario");
    add_common(simulate, f, {});
    simulate->add_flag("--force", f.force, "write into a non-empty directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = assemble(f);
        if (*ingest) return cmd_ingest(cfg);
        if (*featurize) return cmd_featurize(cfg);
        if (*train) return cmd_train(cfg);
        if (*evaluate) return cmd_evaluate(cfg);
        if (*backtest) return cmd_backtest(cfg);
        if (*simulate) return cmd_simulate(cfg, f.force);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
