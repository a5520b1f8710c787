// Command-line shell: train / sample / eval / oracle-check plus a desk-scale
// dataset generator. Every subcommand is a pure function of (inputs, seed).
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "graphdiff/desk.hpp"
#include "graphdiff/eval.hpp"
#include "graphdiff/io.hpp"
#include "graphdiff/sampler.hpp"
#include "graphdiff/training.hpp"

namespace gd = graphdiff;

namespace {

// exit-code categories for scripted callers
constexpr int kExitIo = 3;
constexpr int kExitSchema = 4;
constexpr int kExitDomain = 5;
constexpr int kExitNumeric = 6;
constexpr int kExitCheckFailed = 7;

int verbosity() {
    const char* v = std::getenv("GRAPHDIFF_VERBOSE");
    return v ? std::atoi(v) : 0;
}

gd::TrainRegime parse_regime(const std::string& s) {
    if (s == "per-property") return gd::TrainRegime::PerProperty;
    if (s == "subset-pooled") return gd::TrainRegime::SubsetPooled;
    throw gd::SchemaError("unknown regime '" + s + "'");
}

/// "m=v" with v an integer class or comma-separated floats, chosen by schema.
void parse_condition(const std::string& arg, const gd::ConditionSchema& schema,
                     gd::ConditionAssignment& out) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw gd::SchemaError("--cond expects slot=value, got '" + arg + "'");
    const int m = std::stoi(arg.substr(0, eq));
    if (m < 0 || m >= static_cast<int>(schema.size()))
        throw gd::SchemaError("--cond slot " + std::to_string(m) + " outside the checkpoint schema");
    const std::string val = arg.substr(eq + 1);
    gd::ConditionValue v;
    if (schema[static_cast<std::size_t>(m)].kind == gd::ConditionSlotSpec::Kind::Categorical) {
        v = gd::ConditionValue::categorical(std::stoi(val));
    } else {
        std::vector<double> xs;
        std::size_t pos = 0;
        while (pos <= val.size()) {
            const auto comma = val.find(',', pos);
            xs.push_back(std::stod(val.substr(pos, comma - pos)));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        v = gd::ConditionValue::numeric(std::move(xs));
    }
    gd::validate_value(v, schema[static_cast<std::size_t>(m)]);
    out.slots[static_cast<std::size_t>(m)] = std::move(v);
}

/// "m:w,m:w" CoG slot-weight list.
std::vector<std::pair<int, double>> parse_slot_weights(const std::string& arg, int m_total) {
    std::vector<std::pair<int, double>> out;
    std::size_t pos = 0;
    while (pos <= arg.size()) {
        const auto comma = arg.find(',', pos);
        const std::string item = arg.substr(pos, comma - pos);
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw gd::SchemaError("--slots expects slot:weight entries, got '" + item + "'");
        const int m = std::stoi(item.substr(0, colon));
        if (m < 0 || m >= m_total)
            throw gd::SchemaError("--slots slot " + std::to_string(m) +
                                  " outside the checkpoint schema");
        out.emplace_back(m, std::stod(item.substr(colon + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<int> parse_subset(const std::string& arg, int m_total) {
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos <= arg.size()) {
        const auto comma = arg.find(',', pos);
        const int m = std::stoi(arg.substr(pos, comma - pos));
        if (m < 0 || m >= m_total)
            throw gd::SchemaError("--subset slot " + std::to_string(m) +
                                  " outside the checkpoint schema");
        out.push_back(m);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gd::IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw gd::IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data, out, loss_csv, scorer = "tabular", regime = "per-property";
    std::string bin_spacing = "linear";
    gd::TrainConfig cfg;
    int d_h = 16, hidden = 32;
};

int run_train(const TrainArgs& a) {
    gd::Dataset dataset = gd::load_dataset(a.data);
    gd::TrainConfig cfg = a.cfg;
    cfg.regime = parse_regime(a.regime);
    cfg.validate();
    const gd::NoiseSchedule schedule;
    const auto models = gd::TransitionModels::for_spaces(dataset.spaces);
    gd::json echo = {{"scorer", a.scorer},
                     {"lr", cfg.learning_rate},
                     {"batch", cfg.batch_size},
                     {"steps", cfg.steps},
                     {"lambda_edge", cfg.lambda_edge},
                     {"p_drop", cfg.p_drop},
                     {"warmup", cfg.warmup_steps},
                     {"clip", cfg.grad_clip_norm},
                     {"decay_floor", cfg.decay_floor},
                     {"regime", a.regime}};

    std::vector<gd::LossReport> trace;
    gd::Checkpoint ck;
    if (a.scorer == "tabular") {
        gd::BinSpacing spacing;
        if (a.bin_spacing == "linear") {
            spacing = gd::BinSpacing::Linear;
        } else if (a.bin_spacing == "geometric") {
            spacing = gd::BinSpacing::Geometric;
        } else {
            throw gd::SchemaError("unknown bin spacing '" + a.bin_spacing + "'");
        }
        auto scorer = gd::TabularScorer::for_dataset(dataset, schedule, models, cfg.regime,
                                                     cfg.time_bins, spacing);
        trace = gd::train(scorer, dataset, cfg, schedule, models);
        ck = gd::checkpoint_of(scorer, dataset.schema, echo, cfg.seed);
    } else if (a.scorer == "neural") {
        gd::NeuralScorer::Config ncfg;
        ncfg.d_h = a.d_h;
        ncfg.hidden = a.hidden;
        gd::NeuralScorer scorer(dataset.spaces, schedule, models, dataset.schema, ncfg, cfg.seed);
        trace = gd::train(scorer, dataset, cfg, schedule, models);
        ck = gd::checkpoint_of(scorer, echo, cfg.seed);
        ck.n = dataset.n;
    } else {
        throw gd::SchemaError("unknown scorer kind '" + a.scorer + "'");
    }
    gd::write_checkpoint(ck, a.out);
    if (!a.loss_csv.empty()) write_text(a.loss_csv, gd::loss_trace_csv(trace));
    if (verbosity() > 0)
        std::fprintf(stderr, "trained %d steps, final loss %.6g\n", cfg.steps,
                     trace.back().total);
    std::printf("checkpoint written to %s (final loss %.6g)\n", a.out.c_str(),
                trace.back().total);
    return 0;
}

struct SampleArgs {
    std::string ckpt, out, mode = "unconditional", slots, subset;
    std::vector<std::string> cond;
    gd::SamplerConfig cfg;
    double w = 1.0;
    bool pc = false;
    gd::CalibrationParams cal;
};

int run_sample(const SampleArgs& a) {
    const gd::Checkpoint ck = gd::read_checkpoint(a.ckpt);
    const auto scorer = gd::restore_scorer(ck);
    const int m_total = static_cast<int>(ck.schema.size());

    gd::ConditionAssignment conditions(m_total);
    for (const auto& c : a.cond) parse_condition(c, ck.schema, conditions);

    gd::GuidanceSpec guidance;
    if (a.mode == "unconditional") {
        guidance = gd::GuidanceSpec::unconditional();
    } else if (a.mode == "cfg") {
        guidance = gd::GuidanceSpec::cfg(a.w);
    } else if (a.mode == "cog") {
        if (a.slots.empty()) throw gd::SchemaError("--mode cog requires --slots");
        guidance = gd::GuidanceSpec::cog(parse_slot_weights(a.slots, m_total));
    } else if (a.mode == "fast-cog") {
        if (a.subset.empty()) throw gd::SchemaError("--mode fast-cog requires --subset");
        guidance = gd::GuidanceSpec::fast_cog(parse_subset(a.subset, m_total), a.w);
    } else {
        throw gd::SchemaError("unknown guidance mode '" + a.mode + "'");
    }

    gd::SamplerConfig cfg = a.cfg;
    cfg.n = ck.n > 0 ? ck.n : cfg.n;
    gd::CalibrationParams cal = a.cal;
    cal.enabled = a.pc;
    if (cal.enabled) cal.validate();

    gd::SampleDiagnostics diag;
    const std::vector<gd::Graph> graphs = gd::sample(*scorer, guidance, cal, cfg, conditions,
                                                     ck.spaces, ck.schedule, ck.models, &diag);
    std::vector<std::pair<gd::Graph, gd::ConditionAssignment>> records;
    records.reserve(graphs.size());
    for (const auto& g : graphs) records.emplace_back(g, conditions);
    gd::save_samples(records, ck.spaces, ck.schema, cfg.n, a.out);
    std::printf("%d samples written to %s (degenerate tokens: %ld, frozen states: %ld)\n",
                cfg.batch, a.out.c_str(), diag.degenerate_tokens, diag.frozen_states);
    return 0;
}

struct EvalArgs {
    std::string samples, data, report;
};

int run_eval(const EvalArgs& a) {
    const gd::SamplesFile sf = gd::load_samples(a.samples);
    const gd::Dataset dataset = gd::load_dataset(a.data);
    if (!(sf.spaces == dataset.spaces) || sf.n != dataset.n)
        throw gd::SchemaError("samples and dataset disagree on spaces or n");

    // empirical sample distribution vs the exact data distribution
    const std::uint64_t total = gd::graph_space_size(sf.n, sf.spaces);
    std::vector<double> emp(total, 0.0);
    for (const auto& [g, cond] : sf.samples)
        emp[gd::canonical_index(g, sf.spaces)] += 1.0 / static_cast<double>(sf.samples.size());
    const double tv = gd::total_variation(emp, gd::data_distribution(dataset));

    const int real_edge_states = sf.spaces.edge_card - (sf.spaces.absorbing ? 2 : 1);
    gd::ValenceTable table;
    table.max_degree.assign(static_cast<std::size_t>(sf.spaces.node_card),
                            real_edge_states * (sf.n - 1));
    std::vector<gd::Graph> graphs;
    for (const auto& [g, cond] : sf.samples) graphs.push_back(g);
    const double validity = gd::validity_rate(graphs, table, sf.spaces);

    const gd::SyntheticLabeler labeler{sf.spaces};
    bool any_requested = false;
    for (const auto& [g, cond] : sf.samples)
        for (const auto& slot : cond.slots)
            if (slot) any_requested = true;

    std::string csv = "metric,slot,value\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "tv,,%.17g\nvalidity,,%.17g\n", tv, validity);
    csv += buf;
    std::printf("tv=%.6f\nvalidity=%.6f\n", tv, validity);
    if (any_requested) {
        const gd::ControllabilityReport rep = gd::controllability(sf.samples, labeler);
        for (std::size_t m = 0; m < rep.accuracy.size(); ++m) {
            if (!std::isnan(rep.accuracy[m])) {
                std::snprintf(buf, sizeof(buf), "accuracy,%zu,%.17g\n", m, rep.accuracy[m]);
                csv += buf;
                std::printf("accuracy[%zu]=%.6f\n", m, rep.accuracy[m]);
            }
            if (!std::isnan(rep.mae[m])) {
                std::snprintf(buf, sizeof(buf), "mae,%zu,%.17g\n", m, rep.mae[m]);
                csv += buf;
                std::printf("mae[%zu]=%.6f\n", m, rep.mae[m]);
            }
        }
    }
    if (!a.report.empty()) write_text(a.report, csv);
    return 0;
}

struct OracleArgs {
    std::string data;
    int steps = 512;
    double threshold = 0.05;
};

int run_oracle_check(const OracleArgs& a) {
    const gd::Dataset dataset = gd::load_dataset(a.data);
    const gd::NoiseSchedule schedule;
    const auto models = gd::TransitionModels::for_spaces(dataset.spaces);
    const gd::ExactScorer oracle(dataset, schedule, models, /*lenient=*/true);
    gd::SamplerConfig cfg;
    cfg.steps = a.steps;
    cfg.n = dataset.n;
    const gd::ConditionAssignment none(static_cast<int>(dataset.schema.size()));
    const std::vector<double> terminal = gd::exact_model_distribution(
        oracle, gd::GuidanceSpec::unconditional(), gd::CalibrationParams{}, cfg, none,
        dataset.spaces, schedule, models);
    const double tv = gd::total_variation(terminal, gd::data_distribution(dataset));
    const double inv = gd::invariance_check(terminal, dataset.n, dataset.spaces);
    std::printf("TV=%.6f\ninvariance=%.3e\n", tv, inv);
    if (tv > a.threshold) {
        std::fprintf(stderr, "oracle-check failed: TV %.6f > %.6f\n", tv, a.threshold);
        return kExitCheckFailed;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete-state graph diffusion: train, sample, evaluate"};
    app.require_subcommand(1);

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train a scorer on a dataset");
    train->add_option("--data", ta.data, "dataset file")->required();
    train->add_option("--out", ta.out, "checkpoint output path")->required();
    train->add_option("--loss-csv", ta.loss_csv, "loss trace CSV output path");
    train->add_option("--scorer", ta.scorer, "tabular|neural");
    train->add_option("--regime", ta.regime, "per-property|subset-pooled");
    train->add_option("--steps", ta.cfg.steps, "optimization steps");
    train->add_option("--lr", ta.cfg.learning_rate, "learning rate");
    train->add_option("--batch", ta.cfg.batch_size, "batch size");
    train->add_option("--lambda-edge", ta.cfg.lambda_edge, "edge loss weight");
    train->add_option("--p-drop", ta.cfg.p_drop, "condition dropout probability");
    train->add_option("--warmup", ta.cfg.warmup_steps, "warmup steps");
    train->add_option("--clip", ta.cfg.grad_clip_norm, "gradient clip norm (0 disables)");
    train->add_option("--decay-floor", ta.cfg.decay_floor, "cosine decay floor fraction");
    train->add_option("--time-bins", ta.cfg.time_bins, "tabular time bins");
    train->add_option("--bin-spacing", ta.bin_spacing, "tabular bin spacing: linear|geometric");
    train->add_option("--beta1", ta.cfg.adam_beta1, "optimizer first-moment decay");
    train->add_option("--beta2", ta.cfg.adam_beta2, "optimizer second-moment decay");
    train->add_option("--d-h", ta.d_h, "neural condition embedding width");
    train->add_option("--hidden", ta.hidden, "neural hidden width");
    train->add_option("--seed", ta.cfg.seed, "RNG seed");

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "draw graphs from a checkpoint");
    sample->add_option("--ckpt", sa.ckpt, "checkpoint path")->required();
    sample->add_option("--out", sa.out, "samples output path")->required();
    sample->add_option("--count", sa.cfg.batch, "number of samples");
    sample->add_option("--steps", sa.cfg.steps, "reverse steps T");
    sample->add_option("--mode", sa.mode, "unconditional|cfg|cog|fast-cog");
    sample->add_option("--w", sa.w, "guidance scale (cfg / fast-cog)");
    sample->add_option("--slots", sa.slots, "cog slot:weight list, e.g. 0:1.5,1:1.0");
    sample->add_option("--subset", sa.subset, "fast-cog slot subset, e.g. 0,1");
    sample->add_option("--cond", sa.cond, "requested condition slot=value (repeatable)");
    sample->add_flag("--pc", sa.pc, "enable probability calibration");
    sample->add_option("--alpha", sa.cal.alpha, "PC lower percentile");
    sample->add_option("--beta", sa.cal.beta, "PC upper percentile");
    sample->add_option("--tau", sa.cal.tau, "PC temperature");
    sample->add_option("--seed", sa.cfg.seed, "RNG seed");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "score a samples file against a dataset");
    eval->add_option("--samples", ea.samples, "samples file")->required();
    eval->add_option("--data", ea.data, "dataset file")->required();
    eval->add_option("--report", ea.report, "metric report CSV output path");

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle-check",
                                      "exact-score reverse-dynamics verification");
    oracle->add_option("--data", oa.data, "dataset file")->required();
    oracle->add_option("--steps", oa.steps, "reverse steps T");
    oracle->add_option("--threshold", oa.threshold, "TV pass threshold");

    std::string gen_out;
    bool gen_absorb = false;
    auto* gen = app.add_subcommand("gen-data", "write the desk-scale reference dataset");
    gen->add_option("--out", gen_out, "dataset output path")->required();
    gen->add_flag("--absorb", gen_absorb, "absorbing (MASK) variant");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) return run_train(ta);
        if (*sample) return run_sample(sa);
        if (*eval) return run_eval(ea);
        if (*oracle) return run_oracle_check(oa);
        if (*gen) {
            gd::save_dataset(gd::desk_dataset(gen_absorb), gen_out);
            std::printf("dataset written to %s\n", gen_out.c_str());
            return 0;
        }
    } catch (const gd::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitIo;
    } catch (const gd::SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return kExitSchema;
    } catch (const gd::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const gd::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitDomain;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
