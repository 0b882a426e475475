// Copyright (C) 2026 The streammem Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include "json_io.hpp"
#include "oracle.hpp"

namespace streammem::cli {

namespace {

struct RunConfig {
    std::size_t stm_capacity = kDefaultStmCapacity;
    std::size_t ltm_capacity = kDefaultLtmCapacity;
    std::size_t k = kDefaultTopK;
    std::size_t update_freq = kDefaultUpdateFreq;
    double protection_ratio = kDefaultProtectionRatio;
    double tau = kDefaultTemperature;
    std::string policy = "redundancy_aware";
    std::uint64_t seed = 0;
    std::string input;
    std::string scene_spec;
    std::string output;
    std::string format = "json";

    std::string queries;
    std::string params;

    std::string batch_spec;
    std::string mode = "component";
    std::size_t batches = 1;

    void validate() const {
        STREAMMEM_CHECK(stm_capacity >= 1, InvalidConfig, "--stm must be positive");
        STREAMMEM_CHECK(ltm_capacity >= 1, InvalidConfig, "--ltm must be positive");
        STREAMMEM_CHECK(k >= 1, InvalidConfig, "--k must be positive");
        STREAMMEM_CHECK(update_freq >= 1, InvalidConfig, "--update-freq must be positive");
        STREAMMEM_CHECK(std::isfinite(protection_ratio) && protection_ratio >= 0.0 && protection_ratio < 1.0,
                        InvalidConfig,
                        "--rho must lie in [0, 1)");
        STREAMMEM_CHECK(std::isfinite(tau) && tau > 0.0, InvalidConfig, "--tau must be > 0");
        STREAMMEM_CHECK(batches >= 1, InvalidConfig, "--batches must be positive");
        parse_policy(policy);
    }

    LtmConfig ltm_config() const {
        return LtmConfig{ltm_capacity, update_freq, protection_ratio};
    }
    MemoryConfig memory_config() const {
        return MemoryConfig{stm_capacity, ltm_config()};
    }
    PolicyConfig policy_config() const {
        return PolicyConfig{ltm_config(), k, seed};
    }
    bool csv() const {
        return format == "csv";
    }
};

void add_common_options(CLI::App& cmd, RunConfig& cfg) {
    cmd.add_option("--input", cfg.input, "WATF feature stream file");
    cmd.add_option("--scene-spec", cfg.scene_spec, "JSON scene spec for a synthetic stream");
    cmd.add_option("--policy", cfg.policy, "fifo | uniform | redundancy_aware");
    cmd.add_option("--stm", cfg.stm_capacity, "short-term memory capacity");
    cmd.add_option("--ltm", cfg.ltm_capacity, "long-term memory capacity");
    cmd.add_option("--k", cfg.k, "number of retrieved entries");
    cmd.add_option("--update-freq", cfg.update_freq, "offers between full similarity refreshes");
    cmd.add_option("--rho", cfg.protection_ratio, "protection ratio in [0, 1)");
    cmd.add_option("--tau", cfg.tau, "contrastive temperature");
    cmd.add_option("--seed", cfg.seed, "seed for the reservoir baseline and fixtures");
    cmd.add_option("--out", cfg.output, "output path (default: stdout)");
    cmd.add_option("--format", cfg.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
}

/// Frames from a WATF file or a synthetic scene spec, one at a time.
class FrameSource {
public:
    explicit FrameSource(const RunConfig& cfg) {
        STREAMMEM_CHECK(cfg.input.empty() != cfg.scene_spec.empty(),
                        InvalidConfig,
                        "exactly one of --input or --scene-spec is required");
        if (!cfg.input.empty()) {
            m_reader.emplace(cfg.input);
            m_channels = m_reader->header().dim;
        } else {
            m_spec = scene_spec_from_json(load_json(cfg.scene_spec));
            m_stream = generate_stream(*m_spec);
            m_channels = m_spec->dim;
        }
    }

    std::optional<FeatureMap> next() {
        if (m_reader) {
            return m_reader->next();
        }
        if (m_pos < m_stream.frames.size()) {
            return m_stream.frames[m_pos++];
        }
        return std::nullopt;
    }

    std::size_t channels() const noexcept {
        return m_channels;
    }
    bool labelled() const noexcept {
        return m_spec.has_value();
    }
    const SyntheticStream& stream() const noexcept {
        return m_stream;
    }
    const std::optional<SceneSpec>& spec() const noexcept {
        return m_spec;
    }

private:
    std::optional<StreamReader> m_reader;
    std::optional<SceneSpec> m_spec;
    SyntheticStream m_stream;
    std::size_t m_pos = 0;
    std::size_t m_channels = 0;
};

struct IngestOutcome {
    StreamMetrics metrics;
    std::optional<HierarchicalMemory> memory;
    std::vector<MemoryEntry> retained;
};

IngestOutcome ingest_frames(const RunConfig& cfg,
                            FrameSource& source,
                            const std::function<void(const EvictionReport&)>& on_report) {
    const Policy policy = parse_policy(cfg.policy);
    IngestOutcome outcome;
    std::unique_ptr<PolicyStore> store;

    const auto start = std::chrono::steady_clock::now();
    while (auto frame = source.next()) {
        MemoryEntry entry;
        const std::uint64_t order = frame->frame_index();
        try {
            entry = MemoryEntry::make(std::move(*frame), order);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroVector) {
                throw;
            }
            ++outcome.metrics.frames_skipped;
            continue;
        }
        EvictionReport report;
        if (policy == Policy::RedundancyAware) {
            if (!outcome.memory) {
                outcome.memory.emplace(entry.channels(), cfg.memory_config());
            }
            report = outcome.memory->ingest(std::move(entry));
        } else {
            if (!store) {
                store = make_policy_store(policy, entry.channels(), cfg.policy_config());
            }
            report = store->offer(std::move(entry));
        }
        ++outcome.metrics.frames_ingested;
        on_report(report);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.metrics.ingest_throughput =
        seconds > 0.0 ? static_cast<double>(outcome.metrics.frames_ingested) / seconds : 0.0;

    if (outcome.memory) {
        outcome.retained = outcome.memory->ltm().entries();
    } else if (store) {
        outcome.retained = store->retained();
    }
    outcome.metrics.retained = outcome.retained.size();
    outcome.metrics.diversity = diversity(outcome.retained);
    if (source.labelled()) {
        const auto& s = source.stream();
        outcome.metrics.scene_coverage = scene_coverage(outcome.retained, s.labels, s.centroids.size());
        outcome.metrics.recall_at_k = recall_at_k(outcome.retained, s.labels, s.centroids, cfg.k);
    }
    return outcome;
}

/// Resolves --out to a stream, keeping any opened file alive.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback)
        : m_out(&fallback) {
        if (!path.empty()) {
            m_file.open(path, std::ios::trunc);
            STREAMMEM_CHECK(m_file.is_open(), IoFailure, "cannot open '" + path + "' for writing");
            m_out = &m_file;
        }
    }
    std::ostream& stream() {
        return *m_out;
    }
    void finish() {
        m_out->flush();
        STREAMMEM_CHECK(m_out->good(), IoFailure, "failed writing output");
    }

private:
    std::ofstream m_file;
    std::ostream* m_out;
};

const char* kReportCsvHeader = "frame_counter,ingest_order,admitted,evicted,evicted_ingest_order,slot,refreshed";
const char* kMetricsCsvHeader =
    "scene_coverage,diversity,recall_at_k,ingest_throughput,frames_ingested,frames_skipped,retained";

std::string report_csv(const EvictionReport& r) {
    std::string line = std::to_string(r.frame_counter) + "," + std::to_string(r.ingest_order) + "," +
                       (r.admitted ? "1" : "0") + "," + (r.evicted ? "1" : "0") + ",";
    if (r.evicted_ingest_order) {
        line += std::to_string(*r.evicted_ingest_order);
    }
    line += ",";
    if (r.slot) {
        line += std::to_string(*r.slot);
    }
    line += std::string(",") + (r.refreshed ? "1" : "0");
    return line;
}

std::string metrics_csv(const StreamMetrics& m) {
    return csv_optional(m.scene_coverage) + "," + csv_number(m.diversity) + "," + csv_optional(m.recall_at_k) + "," +
           csv_number(m.ingest_throughput) + "," + std::to_string(m.frames_ingested) + "," +
           std::to_string(m.frames_skipped) + "," + std::to_string(m.retained);
}

json metrics_event(const StreamMetrics& m) {
    json j = to_json(m);
    j["type"] = "metrics";
    j["nondeterministic_fields"] = {"ingest_throughput"};
    return j;
}

void cmd_ingest(const RunConfig& cfg, std::ostream& out) {
    FrameSource source(cfg);
    Sink sink(cfg.output, out);
    auto& os = sink.stream();
    if (cfg.csv()) {
        os << kReportCsvHeader << '\n';
    }
    const auto outcome = ingest_frames(cfg, source, [&](const EvictionReport& r) {
        if (cfg.csv()) {
            os << report_csv(r) << '\n';
        } else {
            os << to_json(r).dump() << '\n';
        }
    });
    if (cfg.csv()) {
        os << '\n' << kMetricsCsvHeader << '\n' << metrics_csv(outcome.metrics) << '\n';
    } else {
        os << metrics_event(outcome.metrics).dump() << '\n';
    }
    sink.finish();
}

void cmd_retrieve(const RunConfig& cfg, std::ostream& out) {
    STREAMMEM_CHECK(!cfg.queries.empty(), InvalidConfig, "retrieve needs --queries");
    STREAMMEM_CHECK(parse_policy(cfg.policy) == Policy::RedundancyAware,
                    InvalidConfig,
                    "retrieve runs over the redundancy_aware memory only");
    const auto queries = read_stream(cfg.queries);
    FrameSource source(cfg);
    Sink sink(cfg.output, out);
    auto& os = sink.stream();
    if (cfg.csv()) {
        os << kReportCsvHeader << '\n';
    }
    auto outcome = ingest_frames(cfg, source, [&](const EvictionReport& r) {
        if (cfg.csv()) {
            os << report_csv(r) << '\n';
        } else {
            os << to_json(r).dump() << '\n';
        }
    });
    if (cfg.csv()) {
        os << '\n' << kMetricsCsvHeader << '\n' << metrics_csv(outcome.metrics) << '\n';
    } else {
        os << metrics_event(outcome.metrics).dump() << '\n';
    }

    std::size_t dim = source.channels();
    if (dim == 0 && !queries.empty()) {
        dim = queries.front().channels();
    }
    if (!outcome.memory) {
        STREAMMEM_CHECK(dim >= 1, InvalidConfig, "cannot infer the embedding dimension");
        outcome.memory.emplace(dim, cfg.memory_config());
    }
    const FusionParams params =
        cfg.params.empty() ? FusionParams::identity(outcome.memory->channels()) : fusion_params_from_json(load_json(cfg.params));
    const MemorySnapshot snapshot = outcome.memory->snapshot();

    if (cfg.csv()) {
        os << '\n' << "query,rank,slot,ingest_order,score" << '\n';
    }
    for (std::size_t qi = 0; qi < queries.size(); ++qi) {
        const auto& q = queries[qi];
        STREAMMEM_CHECK(q.positions() == 1, InvalidConfig, "query vectors must be stored with P = 1");
        const RetrievalResult result = retrieve(q.data(), snapshot, params, cfg.k);
        if (cfg.csv()) {
            for (std::size_t r = 0; r < result.ranked.size(); ++r) {
                const auto& rs = result.ranked[r];
                os << qi << ',' << r << ',' << rs.slot << ',' << snapshot.ltm()[rs.slot].ingest_order << ','
                   << csv_number(rs.score) << '\n';
            }
        } else {
            json j = to_json(result, snapshot.ltm());
            j["type"] = "retrieval";
            j["query"] = qi;
            os << j.dump() << '\n';
        }
    }
    sink.finish();
}

void cmd_bench_policies(const RunConfig& cfg, std::ostream& out) {
    json policies = json::object();
    std::vector<std::pair<Policy, StreamMetrics>> rows;
    for (Policy p : kAllPolicies) {
        RunConfig run_cfg = cfg;
        run_cfg.policy = std::string(to_string(p));
        FrameSource source(run_cfg);
        const auto outcome = ingest_frames(run_cfg, source, [](const EvictionReport&) {});
        policies[std::string(to_string(p))] = to_json(outcome.metrics);
        rows.emplace_back(p, outcome.metrics);
    }

    Sink sink(cfg.output, out);
    auto& os = sink.stream();
    if (cfg.csv()) {
        os << "policy," << kMetricsCsvHeader << '\n';
        for (const auto& [p, m] : rows) {
            os << to_string(p) << ',' << metrics_csv(m) << '\n';
        }
    } else {
        json config = {{"stm", cfg.stm_capacity},
                       {"ltm", cfg.ltm_capacity},
                       {"k", cfg.k},
                       {"update_freq", cfg.update_freq},
                       {"rho", cfg.protection_ratio},
                       {"seed", cfg.seed}};
        if (!cfg.scene_spec.empty()) {
            config["scene_spec"] = to_json(scene_spec_from_json(load_json(cfg.scene_spec)));
        } else {
            config["input"] = cfg.input;
        }
        json doc = {{"config", config}, {"policies", policies}, {"nondeterministic_fields", {"ingest_throughput"}}};
        os << doc.dump(2) << '\n';
    }
    sink.finish();
}

RaclBatch batch_from_file(const RaclFixtureSpec& spec, const std::string& path) {
    // Layout: B queries, then sum(T_i) retrieved frames, then M * ltm_frames LTM frames; P = 1.
    const auto frames = read_stream(path);
    std::size_t cursor = 0;
    auto take = [&]() {
        STREAMMEM_CHECK(cursor < frames.size(), InvalidConfig, "--input has too few frames for the batch spec");
        const auto& f = frames[cursor++];
        STREAMMEM_CHECK(f.positions() == 1, InvalidConfig, "RACL feature files must store P = 1 frames");
        return std::vector<double>(f.data().begin(), f.data().end());
    };
    RaclBatch batch;
    batch.temperature = spec.temperature;
    batch.num_shift_negatives = spec.num_shift_negatives;
    batch.mode = spec.mode;
    for (std::size_t i = 0; i < spec.batch; ++i) {
        batch.queries.push_back(take());
    }
    for (std::size_t i = 0; i < spec.batch; ++i) {
        FrameStack stack;
        const std::size_t t = spec.frames_per_sample.empty() ? 3 : spec.frames_per_sample[i];
        for (std::size_t f = 0; f < t; ++f) {
            stack.push_back(take());
        }
        batch.retrieved.push_back(std::move(stack));
    }
    for (std::size_t j = 0; j < spec.ltm_samples; ++j) {
        FrameStack stack;
        for (std::size_t f = 0; f < spec.ltm_frames; ++f) {
            stack.push_back(take());
        }
        batch.ltm_sample.push_back(std::move(stack));
    }
    STREAMMEM_CHECK(cursor == frames.size(), InvalidConfig, "--input has more frames than the batch spec uses");
    try {
        batch.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    return batch;
}

constexpr double kGradientTolerance = 1e-6;

void cmd_racl_check(const RunConfig& cfg, std::ostream& out) {
    STREAMMEM_CHECK(cfg.mode == "component" || cfg.mode == "in_batch", InvalidConfig, "--mode must be component or in_batch");
    STREAMMEM_CHECK(cfg.tau >= 0.05, InvalidConfig, "the reference evaluation needs --tau >= 0.05");
    RaclFixtureSpec base;
    base.temperature = cfg.tau;
    base.seed = cfg.seed;
    base.mode = cfg.mode == "component" ? NegativeMode::ComponentShift : NegativeMode::InBatchShift;
    if (!cfg.batch_spec.empty()) {
        base = racl_fixture_from_json(load_json(cfg.batch_spec), base);
    }

    json per_batch = json::array();
    double worst_grad = 0.0;
    double worst_loss = 0.0;
    const std::size_t runs = cfg.input.empty() ? cfg.batches : 1;
    for (std::size_t b = 0; b < runs; ++b) {
        RaclFixtureSpec spec = base;
        spec.seed = base.seed + b;
        RaclBatch batch;
        if (cfg.input.empty()) {
            try {
                batch = make_seeded_batch(spec);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidConfig, e.what());
            }
        } else {
            batch = batch_from_file(spec, cfg.input);
        }

        const RaclOutput got = racl_loss(batch);
        const oracle::RaclReference ref = oracle::racl(batch);
        double grad_err = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            grad_err = std::max(grad_err, oracle::max_relative_error(got.grad_queries[i], ref.grad_queries[i]));
        }
        if (batch.mode == NegativeMode::ComponentShift) {
            grad_err = std::max(grad_err, oracle::max_relative_error(got.grad_anchor, ref.grad_anchor));
        } else {
            for (std::size_t i = 0; i < batch.size(); ++i) {
                grad_err = std::max(grad_err,
                                    oracle::max_relative_error(got.grad_sample_anchors[i], ref.grad_sample_anchors[i]));
            }
        }
        const double loss_err = std::abs(got.loss - ref.loss);
        worst_grad = std::max(worst_grad, grad_err);
        worst_loss = std::max(worst_loss, loss_err);
        per_batch.push_back({{"seed", spec.seed},
                             {"loss", got.loss},
                             {"oracle_loss", ref.loss},
                             {"loss_abs_error", loss_err},
                             {"max_rel_grad_error", grad_err}});
    }

    const bool pass = worst_grad < kGradientTolerance;
    Sink sink(cfg.output, out);
    auto& os = sink.stream();
    if (cfg.csv()) {
        os << "seed,loss,oracle_loss,loss_abs_error,max_rel_grad_error\n";
        for (const auto& row : per_batch) {
            os << row["seed"].get<std::uint64_t>() << ',' << csv_number(row["loss"]) << ','
               << csv_number(row["oracle_loss"]) << ',' << csv_number(row["loss_abs_error"]) << ','
               << csv_number(row["max_rel_grad_error"]) << '\n';
        }
    } else {
        json doc = {{"batches", per_batch},
                    {"max_rel_grad_error", worst_grad},
                    {"max_loss_abs_error", worst_loss},
                    {"tolerance", kGradientTolerance},
                    {"pass", pass}};
        os << doc.dump(2) << '\n';
    }
    sink.finish();
    if (!pass) {
        throw std::runtime_error("GradientCheckFailed: max relative gradient error " + std::to_string(worst_grad));
    }
}

void print_error(std::ostream& err, std::string_view code, const std::string& message, int exit_code) {
    err << json{{"error", code}, {"message", message}, {"exit_code", exit_code}}.dump() << std::endl;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"streammem: streaming hierarchical feature memory harness", "streammem"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    RunConfig cfg;
    auto* ingest = app.add_subcommand("ingest", "stream frames into memory; emit eviction log and metrics");
    auto* retrieve_cmd = app.add_subcommand("retrieve", "ingest, then rank LTM entries for each query vector");
    auto* bench = app.add_subcommand("bench-policies", "compare fifo, uniform and redundancy_aware eviction");
    auto* racl = app.add_subcommand("racl-check", "check RACL gradients against finite differences");
    for (auto* cmd : {ingest, retrieve_cmd, bench, racl}) {
        add_common_options(*cmd, cfg);
    }
    retrieve_cmd->add_option("--queries", cfg.queries, "WATF file of query vectors (P = 1)");
    retrieve_cmd->add_option("--params", cfg.params, "JSON fusion parameters (default: identity)");
    racl->add_option("--batch-spec", cfg.batch_spec, "JSON batch descriptor");
    racl->add_option("--mode", cfg.mode, "component | in_batch");
    racl->add_option("--batches", cfg.batches, "number of seeded batches (seed, seed+1, ...)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        print_error(err, "UsageError", e.what(), kExitValidationError);
        return kExitValidationError;
    }

    try {
        cfg.validate();
        if (ingest->parsed()) {
            cmd_ingest(cfg, out);
        } else if (retrieve_cmd->parsed()) {
            cmd_retrieve(cfg, out);
        } else if (bench->parsed()) {
            cmd_bench_policies(cfg, out);
        } else if (racl->parsed()) {
            cmd_racl_check(cfg, out);
        }
    } catch (const Error& e) {
        const int code = is_validation_error(e.code()) ? kExitValidationError : kExitRuntimeError;
        print_error(err, to_string(e.code()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        std::string what = e.what();
        std::string code = "RuntimeError";
        if (const auto colon = what.find(':'); what.rfind("GradientCheckFailed", 0) == 0 && colon != std::string::npos) {
            code = "GradientCheckFailed";
            what = what.substr(colon + 2);
        }
        print_error(err, code, what, kExitRuntimeError);
        return kExitRuntimeError;
    }
    return kExitOk;
}

}  // namespace streammem::cli
