#pragma once

// Classification of every (or a seeded sample of) permutation gate on
// H1 (x) H2, with an append-only JSON Lines record file that can be resumed.
//
// File layout: one header object, then one record per line.
//   {"format": "ctckit-census/1", "config_hash": ..., "config": ..., "probe_budget": ...}
//   {"perm": [...], "verdict": ..., "sigma_jump": ..., "rho_hat_jump": ..., "wall_time": ..., "witness_digest": ...}

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "ctckit/discontinuity.hpp"
#include "ctckit/json_io.hpp"
#include "ctckit/log.hpp"
#include "ctckit/rng.hpp"

namespace ctckit {

inline constexpr const char* kCensusFormat = "ctckit-census/1";

struct CensusMode {
    enum class Kind { Exhaustive, Sample, Explicit };
    Kind kind = Kind::Sample;
    Index n = 500;           // sample size
    std::uint64_t seed = 42;
    std::vector<std::vector<Index>> perms;  // explicit list

    static CensusMode exhaustive() { return {Kind::Exhaustive, 0, 0, {}}; }
    static CensusMode sample(Index n, std::uint64_t seed) { return {Kind::Sample, n, seed, {}}; }
    static CensusMode explicit_list(std::vector<std::vector<Index>> p) { return {Kind::Explicit, 0, 0, std::move(p)}; }
};

struct CensusConfig {
    Index dim1 = 4;
    Index dim2 = 2;
    CensusMode mode;
    PathStrategy strategy;
    double jump_tol = 0.1;
    Index max_refinements = 1;
    Index workers = 1;
    std::string output = "census.jsonl";
    std::uint64_t exhaustive_cap = 40320;
    bool resume = false;
    // Stop after this many new records (0: no limit). A run stopped this way
    // leaves a file that a later resume completes.
    Index max_new_records = 0;
    // Store measured wall times; off gives byte-reproducible record files.
    bool record_timing = true;

    ClassifyOptions classify_options() const {
        ClassifyOptions o;
        o.strategy = strategy;
        o.jump_tol = jump_tol;
        o.max_refinements = max_refinements;
        return o;
    }
};

struct CensusRecord {
    std::vector<Index> perm;
    Verdict verdict = Verdict::ContinuousWitnessedNone;
    double sigma_jump = 0.0;
    double rho_hat_jump = 0.0;
    double wall_time = 0.0;  // seconds
    std::string witness_digest;
};

// fraction_physical + fraction_ephemeral_only + fraction_continuous_witnessed_none = 1
// (for total > 0); fraction_ephemeral_or_physical counts both discontinuous kinds.
struct CensusSummary {
    Index total = 0;
    Index physical = 0;
    Index ephemeral_only = 0;
    Index continuous = 0;
    double fraction_physical = 0.0;
    double fraction_ephemeral_or_physical = 0.0;
    double fraction_ephemeral_only = 0.0;
    double fraction_continuous_witnessed_none = 0.0;

    bool operator==(const CensusSummary&) const = default;
};

struct CensusRunResult {
    CensusSummary summary;
    Index new_records = 0;
    Index skipped = 0;   // already present when resuming
    Index remaining = 0; // gates not yet recorded when the run stopped
};

// ---------------------------------------------------------------------------
// Serialization

namespace io {

inline json to_json(const CensusMode& m) {
    switch (m.kind) {
        case CensusMode::Kind::Exhaustive: return {{"kind", "exhaustive"}};
        case CensusMode::Kind::Sample: return {{"kind", "sample"}, {"n", m.n}, {"seed", m.seed}};
        case CensusMode::Kind::Explicit: return {{"kind", "explicit"}, {"perms", m.perms}};
    }
    return {};
}

inline CensusMode census_mode_from_json(const json& j) {
    const auto kind = detail::get<std::string>(j, "kind");
    if (kind == "exhaustive") return CensusMode::exhaustive();
    if (kind == "sample")
        return CensusMode::sample(detail::get<Index>(j, "n"), detail::get_or<std::uint64_t>(j, "seed", 42));
    if (kind == "explicit") return CensusMode::explicit_list(detail::get<std::vector<std::vector<Index>>>(j, "perms"));
    throw ParseError("unknown census mode '" + kind + "'");
}

// The fields that determine the records; run-control fields are left out.
inline json census_identity_json(const CensusConfig& c) {
    return {{"dim1", c.dim1},
            {"dim2", c.dim2},
            {"mode", to_json(c.mode)},
            {"strategy", to_json(c.strategy)},
            {"jump_tol", c.jump_tol},
            {"max_refinements", c.max_refinements},
            {"record_timing", c.record_timing}};
}

inline json to_json(const CensusConfig& c) {
    json j = census_identity_json(c);
    j["workers"] = c.workers;
    j["output"] = c.output;
    j["exhaustive_cap"] = c.exhaustive_cap;
    return j;
}

inline CensusConfig census_config_from_json(const json& j, CensusConfig c = {}) {
    if (!j.is_object()) throw ParseError("census config must be a JSON object");
    c.dim1 = detail::get_or(j, "dim1", c.dim1);
    c.dim2 = detail::get_or(j, "dim2", c.dim2);
    if (j.contains("mode")) c.mode = census_mode_from_json(j.at("mode"));
    if (j.contains("strategy")) c.strategy = path_strategy_from_json(j.at("strategy"), c.strategy);
    c.jump_tol = detail::get_or(j, "jump_tol", c.jump_tol);
    c.max_refinements = detail::get_or(j, "max_refinements", c.max_refinements);
    c.workers = detail::get_or(j, "workers", c.workers);
    c.output = detail::get_or(j, "output", c.output);
    c.exhaustive_cap = detail::get_or(j, "exhaustive_cap", c.exhaustive_cap);
    c.record_timing = detail::get_or(j, "record_timing", c.record_timing);
    return c;
}

inline json to_json(const CensusRecord& r) {
    return {{"perm", r.perm},
            {"verdict", to_string(r.verdict)},
            {"sigma_jump", r.sigma_jump},
            {"rho_hat_jump", r.rho_hat_jump},
            {"wall_time", r.wall_time},
            {"witness_digest", r.witness_digest}};
}

inline CensusRecord census_record_from_json(const json& j) {
    return CensusRecord{detail::get<std::vector<Index>>(j, "perm"), parse_verdict(detail::get<std::string>(j, "verdict")),
                        detail::get<double>(j, "sigma_jump"), detail::get<double>(j, "rho_hat_jump"),
                        detail::get<double>(j, "wall_time"), detail::get<std::string>(j, "witness_digest")};
}

inline json to_json(const CensusSummary& s) {
    return {{"total", s.total},
            {"physical", s.physical},
            {"ephemeral_only", s.ephemeral_only},
            {"continuous_witnessed_none", s.continuous},
            {"fraction_physical", s.fraction_physical},
            {"fraction_ephemeral_or_physical", s.fraction_ephemeral_or_physical},
            {"fraction_ephemeral_only", s.fraction_ephemeral_only},
            {"fraction_continuous_witnessed_none", s.fraction_continuous_witnessed_none}};
}

inline CensusSummary census_summary_from_json(const json& j) {
    return CensusSummary{detail::get<Index>(j, "total"),
                         detail::get<Index>(j, "physical"),
                         detail::get<Index>(j, "ephemeral_only"),
                         detail::get<Index>(j, "continuous_witnessed_none"),
                         detail::get<double>(j, "fraction_physical"),
                         detail::get<double>(j, "fraction_ephemeral_or_physical"),
                         detail::get<double>(j, "fraction_ephemeral_only"),
                         detail::get<double>(j, "fraction_continuous_witnessed_none")};
}

}  // namespace io

inline std::string config_hash(const CensusConfig& c) { return io::fnv1a_hex(io::census_identity_json(c).dump()); }

inline io::json probe_budget(const CensusConfig& c) {
    const UnitaryGate id = UnitaryGate::identity(c.dim1, c.dim2);
    const auto paths = c.strategy.kind == PathStrategyKind::ExampleGate && c.dim1 != 4
                           ? std::vector<ProbePath>{}
                           : generate_probe_paths(id, c.strategy);
    return {{"strategy", to_string(c.strategy.kind)},
            {"epsilons", c.strategy.epsilons},
            {"max_refinements", c.max_refinements},
            {"jump_tol", c.jump_tol},
            {"paths_per_gate", paths.size()}};
}

// ---------------------------------------------------------------------------
// Gate enumeration

inline std::uint64_t factorial_capped(std::uint64_t n, std::uint64_t cap) {
    std::uint64_t f = 1;
    for (std::uint64_t i = 2; i <= n; ++i) {
        if (f > cap / i) return cap + 1;
        f *= i;
    }
    return f;
}

inline void check_permutation(const std::vector<Index>& p, Index n) {
    if (static_cast<Index>(p.size()) != n)
        throw InvalidStateError("permutation has " + std::to_string(p.size()) + " entries, expected " + std::to_string(n));
    std::vector<bool> seen(static_cast<std::size_t>(n), false);
    for (Index v : p) {
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
            throw InvalidStateError("not a permutation of 0.." + std::to_string(n - 1));
        seen[static_cast<std::size_t>(v)] = true;
    }
}

// Exhaustive: all (dim1 dim2)! permutations in lexicographic order.
// Sample: n distinct permutations, each a seeded Fisher-Yates shuffle.
inline std::vector<std::vector<Index>> enumerate_permutations(Index dim1, Index dim2, const CensusMode& mode,
                                                              std::uint64_t exhaustive_cap = 40320) {
    if (dim1 < 1 || dim2 < 1) throw DimensionError("census dimensions must be at least 1");
    const Index n = dim1 * dim2;
    std::vector<Index> id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), Index{0});
    std::vector<std::vector<Index>> out;
    switch (mode.kind) {
        case CensusMode::Kind::Exhaustive: {
            const std::uint64_t count = factorial_capped(static_cast<std::uint64_t>(n), exhaustive_cap);
            if (count > exhaustive_cap)
                throw CensusError("exhaustive census of " + std::to_string(n) + "! gates exceeds the cap of " +
                                  std::to_string(exhaustive_cap));
            out.reserve(count);
            std::vector<Index> p = id;
            do out.push_back(p);
            while (std::next_permutation(p.begin(), p.end()));
            break;
        }
        case CensusMode::Kind::Sample: {
            if (mode.n < 0) throw CensusError("sample size must be non-negative");
            const std::uint64_t available = factorial_capped(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(mode.n));
            if (static_cast<std::uint64_t>(mode.n) > available)
                throw CensusError("cannot draw " + std::to_string(mode.n) + " distinct permutations of " +
                                  std::to_string(n) + " elements");
            SeededRng rng(mode.seed);
            std::set<std::vector<Index>> seen;
            while (static_cast<Index>(out.size()) < mode.n) {
                std::vector<Index> p = id;
                for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
                if (seen.insert(p).second) out.push_back(std::move(p));
            }
            break;
        }
        case CensusMode::Kind::Explicit: {
            std::set<std::vector<Index>> seen;
            for (const auto& p : mode.perms) {
                check_permutation(p, n);
                if (seen.insert(p).second) out.push_back(p);
            }
            break;
        }
    }
    return out;
}

inline std::vector<UnitaryGate> enumerate_permutation_gates(Index dim1, Index dim2, const CensusMode& mode,
                                                            std::uint64_t exhaustive_cap = 40320) {
    std::vector<UnitaryGate> gates;
    for (auto& p : enumerate_permutations(dim1, dim2, mode, exhaustive_cap))
        gates.push_back(UnitaryGate::from_permutation(dim1, dim2, std::move(p)));
    return gates;
}

inline CensusRecord census_record(const UnitaryGate& u, const ClassifyOptions& opt, bool record_timing = true) {
    const auto t0 = std::chrono::steady_clock::now();
    const GateClassification gc = classify(u, opt);
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return CensusRecord{*u.permutation(), gc.verdict, gc.sigma_jump, gc.rho_hat_jump, record_timing ? dt : 0.0,
                        gc.witness ? io::fnv1a_hex(io::to_json(*gc.witness).dump()) : std::string()};
}

// ---------------------------------------------------------------------------
// Record files

struct CensusFile {
    std::optional<io::json> header;
    std::vector<CensusRecord> records;  // first occurrence of each permutation
    std::uintmax_t valid_bytes = 0;     // length of the well-formed prefix
    bool torn_tail = false;             // last line incomplete or unparsable
};

// Reads a record file. A malformed final line is tolerated (and reported via
// torn_tail) only when allow_torn_tail is set; any other malformed line is a
// CensusError carrying its 1-based line number.
inline CensusFile read_census_file(const std::string& path, bool allow_torn_tail = false) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CensusError("cannot open record file '" + path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CensusFile f;
    std::set<std::vector<Index>> seen;
    std::size_t pos = 0, line = 0;
    while (pos < text.size()) {
        ++line;
        const std::size_t nl = text.find('\n', pos);
        const bool complete = nl != std::string::npos;
        const std::string s = text.substr(pos, complete ? nl - pos : std::string::npos);
        const std::size_t next = complete ? nl + 1 : text.size();
        const bool last = next >= text.size();
        auto fail = [&](const std::string& why) {
            if (allow_torn_tail && last) {
                f.torn_tail = true;
                return;
            }
            throw CensusError("corrupt record file '" + path + "': " + why, line);
        };
        if (s.find_first_not_of(" \t\r") == std::string::npos) {
            if (!complete) fail("incomplete line");
            else if (!f.torn_tail) f.valid_bytes = next;
            pos = next;
            continue;
        }
        if (!complete) {
            fail("incomplete line");
            break;
        }
        io::json j;
        try {
            j = io::json::parse(s);
        } catch (const io::json::exception& e) {
            fail(std::string("invalid JSON: ") + e.what());
            break;
        }
        try {
            if (line == 1 && j.is_object() && j.contains("format")) {
                if (j.at("format") != kCensusFormat) throw ParseError("unsupported format " + j.at("format").dump());
                f.header = j;
            } else {
                CensusRecord r = io::census_record_from_json(j);
                if (seen.insert(r.perm).second) f.records.push_back(std::move(r));
            }
        } catch (const Error& e) {
            fail(e.what());
            break;
        }
        f.valid_bytes = next;
        pos = next;
    }
    return f;
}

inline std::vector<CensusRecord> load_records(const std::string& path) { return read_census_file(path).records; }

inline CensusSummary summarize(const std::vector<CensusRecord>& records) {
    CensusSummary s;
    std::set<std::vector<Index>> seen;
    for (const auto& r : records) {
        if (!seen.insert(r.perm).second) continue;
        ++s.total;
        switch (r.verdict) {
            case Verdict::Physical: ++s.physical; break;
            case Verdict::Ephemeral: ++s.ephemeral_only; break;
            case Verdict::ContinuousWitnessedNone: ++s.continuous; break;
        }
    }
    if (s.total > 0) {
        const double t = static_cast<double>(s.total);
        s.fraction_physical = static_cast<double>(s.physical) / t;
        s.fraction_ephemeral_only = static_cast<double>(s.ephemeral_only) / t;
        s.fraction_ephemeral_or_physical = static_cast<double>(s.physical + s.ephemeral_only) / t;
        s.fraction_continuous_witnessed_none = static_cast<double>(s.continuous) / t;
    }
    return s;
}

inline CensusSummary summarize(const std::string& path) { return summarize(load_records(path)); }

inline void export_summary_csv(const CensusSummary& s, std::ostream& os) {
    os << "total,physical,ephemeral_only,continuous_witnessed_none,fraction_physical,"
          "fraction_ephemeral_or_physical,fraction_ephemeral_only,fraction_continuous_witnessed_none\n";
    os << s.total << ',' << s.physical << ',' << s.ephemeral_only << ',' << s.continuous << ','
       << io::json(s.fraction_physical).dump() << ',' << io::json(s.fraction_ephemeral_or_physical).dump() << ','
       << io::json(s.fraction_ephemeral_only).dump() << ',' << io::json(s.fraction_continuous_witnessed_none).dump()
       << '\n';
}

inline void export_summary_csv(const CensusSummary& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw CensusError("cannot write '" + path + "'");
    export_summary_csv(s, os);
    if (!os) throw CensusError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Running

inline CensusRunResult run_census(const CensusConfig& cfg) {
    if (cfg.workers < 1) throw CensusError("worker count must be at least 1");
    if (cfg.max_new_records < 0) throw CensusError("max_new_records must be non-negative");
    const auto perms = enumerate_permutations(cfg.dim1, cfg.dim2, cfg.mode, cfg.exhaustive_cap);
    const std::string hash = config_hash(cfg);
    const ClassifyOptions copt = cfg.classify_options();

    std::set<std::vector<Index>> done;
    namespace fs = std::filesystem;
    std::error_code ec;
    const bool exists = fs::exists(cfg.output, ec) && fs::file_size(cfg.output, ec) > 0;
    bool need_header = true;
    if (exists) {
        if (!cfg.resume)
            throw CensusError("record file '" + cfg.output + "' already exists (resume it or choose another path)");
        CensusFile f = read_census_file(cfg.output, true);
        if (!f.header) throw CensusError("record file '" + cfg.output + "' has no header", 1);
        if (f.header->value("config_hash", "") != hash)
            throw CensusError("record file '" + cfg.output + "' was written with a different configuration", 1);
        if (f.torn_tail) {
            log::warn("dropping incomplete last line of " + cfg.output);
            fs::resize_file(cfg.output, f.valid_bytes, ec);
            if (ec) throw CensusError("cannot truncate '" + cfg.output + "': " + ec.message());
        }
        for (const auto& r : f.records) done.insert(r.perm);
        need_header = false;
    }

    std::ofstream out(cfg.output, std::ios::binary | std::ios::app);
    if (!out) throw CensusError("cannot open '" + cfg.output + "' for writing");
    if (need_header) {
        const io::json header{{"format", kCensusFormat},
                              {"config_hash", hash},
                              {"config", io::census_identity_json(cfg)},
                              {"probe_budget", probe_budget(cfg)}};
        out << header.dump() << '\n' << std::flush;
        if (!out) throw CensusError("write to '" + cfg.output + "' failed");
    }

    CensusRunResult result;
    std::vector<const std::vector<Index>*> todo;
    for (const auto& p : perms) {
        if (done.count(p)) ++result.skipped;
        else todo.push_back(&p);
    }
    std::size_t limit = todo.size();
    if (cfg.max_new_records > 0) limit = std::min(limit, static_cast<std::size_t>(cfg.max_new_records));
    log::info("census: " + std::to_string(perms.size()) + " gates, " + std::to_string(result.skipped) +
              " already recorded, " + std::to_string(limit) + " to run");

    std::mutex sink;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    Index written = 0;
    auto worker = [&] {
        for (;;) {
            if (failed) return;
            const std::size_t i = next.fetch_add(1);
            if (i >= limit) return;
            try {
                const UnitaryGate u = UnitaryGate::from_permutation(cfg.dim1, cfg.dim2, *todo[i]);
                const std::string line = io::to_json(census_record(u, copt, cfg.record_timing)).dump();
                std::lock_guard lock(sink);
                out << line << '\n' << std::flush;
                if (!out) throw CensusError("write to '" + cfg.output + "' failed");
                ++written;
                if (written % 50 == 0) log::info("census: " + std::to_string(written) + "/" + std::to_string(limit));
            } catch (...) {
                std::lock_guard lock(sink);
                if (!error) error = std::current_exception();
                failed = true;
                return;
            }
        }
    };
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), std::max<std::size_t>(limit, 1));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    out.close();
    if (error) std::rethrow_exception(error);

    result.new_records = written;
    result.remaining = static_cast<Index>(todo.size()) - written;
    result.summary = summarize(cfg.output);
    return result;
}

}  // namespace ctckit
