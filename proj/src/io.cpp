#include "embedev/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "embedev/errors.hpp"
#include "embedev/util.hpp"

namespace embedev {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw DomainError("config line is not key = value: " + line);
        }
        entries_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
}

void RunConfig::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

std::string RunConfig::get(const std::string& key, const std::string& fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return std::stod(it->second);
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return std::stoll(it->second);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_csv_header(std::ostream& os, const RunConfig& cfg,
                      const std::vector<std::string>& columns) {
    os << "# embedev " << kVersion << "\n";
    for (const auto& [k, v] : cfg.entries()) {
        os << "# " << k << " = " << v << "\n";
    }
    for (size_t i = 0; i < columns.size(); ++i) {
        os << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }
}

void write_potential_csv(std::ostream& os, const RunConfig& cfg,
                         const std::vector<double>& V) {
    write_csv_header(os, cfg, {"n", "V"});
    for (size_t n = 0; n < V.size(); ++n) {
        os << n << "," << format_double(V[n]) << "\n";
    }
}

void write_trajectory_csv(std::ostream& os, const RunConfig& cfg, const Trajectory& traj) {
    write_csv_header(os, cfg, {"n", "V", "logR2", "theta", "logRtilde2"});
    for (const auto& s : traj.samples) {
        os << s.n << "," << format_double(s.V) << "," << format_double(s.log_r2) << ","
           << format_double(s.theta) << "," << format_double(s.log_rt2) << "\n";
    }
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open trajectory file: " + path);
    Trajectory traj;
    traj.prufer_valid = true;
    std::string line;
    bool header_seen = false;
    double prev_rt2 = 0.0;
    std::int64_t prev_n = 0;
    double l2 = 0.0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column row
            continue;
        }
        TrajectorySample s;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf,%lf", &s.n, &s.V, &s.log_r2,
                        &s.theta, &s.log_rt2) != 5) {
            throw DomainError("bad trajectory row: " + line);
        }
        if (!std::isfinite(s.log_r2)) traj.prufer_valid = false;
        // piecewise power-law reconstruction of the partial sums
        double rt2 = std::exp(s.log_rt2);
        if (prev_n == 0) {
            l2 = rt2;
        } else if (s.n > prev_n) {
            double p = (std::log(rt2) - std::log(prev_rt2)) /
                       (std::log(static_cast<double>(s.n)) - std::log(static_cast<double>(prev_n)));
            for (std::int64_t t = prev_n + 1; t <= s.n; ++t) {
                l2 += prev_rt2 * std::pow(static_cast<double>(t) / static_cast<double>(prev_n), p);
            }
        }
        prev_rt2 = rt2;
        prev_n = s.n;
        s.l2_prefix = l2;
        traj.samples.push_back(s);
    }
    if (traj.samples.empty()) throw DomainError("empty trajectory file: " + path);
    traj.n_first = traj.samples.front().n;
    traj.n_last = traj.samples.back().n;
    return traj;
}

namespace {

json config_json(const RunConfig& cfg) {
    json j = json::object();
    for (const auto& [k, v] : cfg.entries()) j[k] = v;
    return j;
}

}  // namespace

std::string decay_report_json(const DecayReport& rep, const RunConfig& cfg) {
    json j;
    j["version"] = std::string(kVersion);
    j["beta"] = rep.beta;
    j["stderr"] = rep.stderr_beta;
    j["fit_range"] = {rep.n_min, rep.n_max};
    j["n_samples"] = rep.n_samples;
    j["channel"] = rep.channel == FitChannel::LogR2 ? "logR2" : "logRtilde2";
    j["verdict"] = to_string(rep.verdict);
    j["tail_fraction"] = rep.tail_fraction;
    j["thresholds"] = {{"ell2_cut", rep.policy.ell2_cut},
                       {"sigma_guard", rep.policy.sigma_guard},
                       {"tail_max", rep.policy.tail_max}};
    json partial = json::array();
    size_t stride = std::max<size_t>(1, rep.l2_partial.size() / 200);
    for (size_t i = 0; i < rep.l2_partial.size(); i += stride) {
        partial.push_back({rep.l2_partial[i].first, rep.l2_partial[i].second});
    }
    j["l2_partial"] = partial;
    j["config"] = config_json(cfg);
    return j.dump(2) + "\n";
}

std::string potential_spec_json(const PotentialSpec& spec, const RunConfig& cfg) {
    json j;
    j["format"] = "embedev-potential-spec";
    j["version"] = std::string(kVersion);
    j["seed"] = spec.seed;
    switch (spec.variant) {
        case PotentialSpec::Variant::Zero:
            j["variant"] = "zero";
            break;
        case PotentialSpec::Variant::WignerVonNeumann:
            j["variant"] = "wigner_von_neumann";
            j["c"] = spec.c;
            j["k"] = spec.k;
            j["phi"] = spec.phi;
            j["b"] = spec.b;
            break;
        case PotentialSpec::Variant::SignType:
            j["variant"] = "sign_type";
            j["a"] = spec.a;
            j["k"] = spec.k;
            j["theta_start"] = spec.theta_start;
            j["n_start"] = spec.n_start;
            break;
        case PotentialSpec::Variant::EvenQ:
            j["variant"] = "even_q";
            j["a"] = spec.a;
            j["p"] = spec.p;
            j["q"] = spec.q;
            j["n0"] = spec.n0;
            j["delta"] = spec.delta;
            j["theta0"] = spec.theta0;
            break;
        case PotentialSpec::Variant::MultiSegment: {
            j["variant"] = "multi_segment";
            json segs = json::array();
            for (const auto& s : spec.segments) {
                segs.push_back({{"E", s.E},
                                {"theta0", s.theta0},
                                {"phi", s.phi},
                                {"amp", s.amp},
                                {"k", s.k},
                                {"n0", s.n0},
                                {"n1", s.n1},
                                {"b", s.b}});
            }
            j["segments"] = segs;
            break;
        }
    }
    j["config"] = config_json(cfg);
    return j.dump(2) + "\n";
}

PotentialSpec potential_spec_from_json(const std::string& text) {
    json j = json::parse(text);
    PotentialSpec spec;
    spec.seed = j.value("seed", 0ULL);
    std::string variant = j.at("variant").get<std::string>();
    if (variant == "zero") {
        spec.variant = PotentialSpec::Variant::Zero;
    } else if (variant == "wigner_von_neumann") {
        spec.variant = PotentialSpec::Variant::WignerVonNeumann;
        spec.c = j.at("c").get<double>();
        spec.k = j.at("k").get<double>();
        spec.phi = j.at("phi").get<double>();
        spec.b = j.at("b").get<std::int64_t>();
    } else if (variant == "sign_type") {
        spec.variant = PotentialSpec::Variant::SignType;
        spec.a = j.at("a").get<double>();
        spec.k = j.at("k").get<double>();
        spec.theta_start = j.at("theta_start").get<double>();
        spec.n_start = j.at("n_start").get<std::int64_t>();
    } else if (variant == "even_q") {
        spec.variant = PotentialSpec::Variant::EvenQ;
        spec.a = j.at("a").get<double>();
        spec.p = j.at("p").get<std::int64_t>();
        spec.q = j.at("q").get<std::int64_t>();
        spec.n0 = j.at("n0").get<std::int64_t>();
        spec.delta = j.at("delta").get<double>();
        spec.theta0 = j.at("theta0").get<double>();
    } else if (variant == "multi_segment") {
        spec.variant = PotentialSpec::Variant::MultiSegment;
        for (const auto& s : j.at("segments")) {
            MultiSegmentParam p;
            p.E = s.at("E").get<double>();
            p.theta0 = s.at("theta0").get<double>();
            p.phi = s.at("phi").get<double>();
            p.amp = s.at("amp").get<double>();
            p.k = s.at("k").get<double>();
            p.n0 = s.at("n0").get<std::int64_t>();
            p.n1 = s.at("n1").get<std::int64_t>();
            p.b = s.at("b").get<std::int64_t>();
            spec.segments.push_back(p);
        }
    } else {
        throw DomainError("unknown potential spec variant: " + variant);
    }
    return spec;
}

std::string glue_schedule_json(const GlueResult& res, const RunConfig& cfg) {
    json j;
    j["version"] = std::string(kVersion);
    json targets = json::array();
    for (const auto& t : res.targets) {
        targets.push_back({{"E", t.E}, {"theta0", t.theta0}});
    }
    j["targets"] = targets;
    json segs = json::array();
    for (const auto& s : res.schedule) {
        segs.push_back({{"target", s.target},
                        {"n0", s.n0},
                        {"n1", s.n1},
                        {"b", s.b},
                        {"phi", s.phi},
                        {"amp", s.amp},
                        {"k", s.k},
                        {"M", s.M},
                        {"served_log_contraction", s.served_log_contraction},
                        {"max_other_log_growth", s.max_other_log_growth}});
    }
    j["schedule"] = segs;
    json cps = json::array();
    for (const auto& c : res.checkpoints) {
        cps.push_back({{"segment", c.segment}, {"n", c.n}, {"log_rt2", c.log_rt2}});
    }
    j["checkpoints"] = cps;
    j["n_start"] = res.n_start;
    j["n_end"] = res.n_end;
    j["max_envelope"] = res.max_envelope;
    j["max_envelope_over_h"] = res.max_envelope_over_h;
    j["config"] = config_json(cfg);
    return j.dump(2) + "\n";
}

}  // namespace embedev
