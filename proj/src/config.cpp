#include "choquard/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "choquard/errors.hpp"

namespace choquard {

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_grid(const std::vector<double>& g) {
    std::string out;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i) out += ',';
        out += fmt_double(g[i]);
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t.empty()) throw ConfigError("empty value for " + key);
    char* end = nullptr;
    const double x = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) throw ConfigError("bad number for " + key + ": " + v);
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t.empty()) throw ConfigError("empty value for " + key);
    char* end = nullptr;
    const long long x = std::strtoll(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) throw ConfigError("bad integer for " + key + ": " + v);
    return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t.empty() || t[0] == '-') throw ConfigError("bad seed for " + key + ": " + v);
    char* end = nullptr;
    const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
    if (end != t.c_str() + t.size()) throw ConfigError("bad integer for " + key + ": " + v);
    return x;
}

std::vector<double> parse_grid(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    std::vector<double> out;
    if (t.empty()) return out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t comma = t.find(',', pos);
        out.push_back(parse_double(key, t.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

const char* const kKinds[] = {"constants", "field",   "spectrum", "energy",     "bubble-scan",
                              "solve",     "linking", "nonexist", "bench-riesz"};

bool known_kind(const std::string& k) {
    for (const char* s : kKinds) {
        if (k == s) return true;
    }
    return false;
}

void apply_key(ExperimentConfig& c, const std::string& key, const std::string& val) {
    if (key == "kind") c.kind = trim(val);
    else if (key == "dim") c.dim = static_cast<int>(parse_int(key, val));
    else if (key == "mu") c.mu = parse_double(key, val);
    else if (key == "lambda") c.lambda = parse_double(key, val);
    else if (key == "lambda_grid") c.lambda_grid = parse_grid(key, val);
    else if (key == "shape") c.shape = trim(val);
    else if (key == "n") c.n = static_cast<int>(parse_int(key, val));
    else if (key == "half_width") c.half_width = parse_double(key, val);
    else if (key == "radius") c.radius = parse_double(key, val);
    else if (key == "delta") c.delta = parse_double(key, val);
    else if (key == "eps_grid") c.eps_grid = parse_grid(key, val);
    else if (key == "tol") c.tol = parse_double(key, val);
    else if (key == "max_iters") c.max_iters = static_cast<int>(parse_int(key, val));
    else if (key == "starts") c.starts = static_cast<int>(parse_int(key, val));
    else if (key == "linking_j") c.linking_j = static_cast<int>(parse_int(key, val));
    else if (key == "epsilon") c.epsilon = parse_double(key, val);
    else if (key == "method") c.method = trim(val);
    else if (key == "init") c.init = trim(val);
    else if (key == "width") c.width = parse_double(key, val);
    else if (key == "center") c.center = parse_grid(key, val);
    else if (key == "seed") c.seed = parse_uint(key, val);
    else if (key == "out_dir") c.out_dir = trim(val);
    else throw ConfigError("unknown config key: " + key);
}

} // namespace

std::string print_config_text(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "kind=" << c.kind << '\n'
        << "dim=" << c.dim << '\n'
        << "mu=" << fmt_double(c.mu) << '\n'
        << "lambda=" << fmt_double(c.lambda) << '\n'
        << "lambda_grid=" << fmt_grid(c.lambda_grid) << '\n'
        << "shape=" << c.shape << '\n'
        << "n=" << c.n << '\n'
        << "half_width=" << fmt_double(c.half_width) << '\n'
        << "radius=" << fmt_double(c.radius) << '\n'
        << "delta=" << fmt_double(c.delta) << '\n'
        << "eps_grid=" << fmt_grid(c.eps_grid) << '\n'
        << "tol=" << fmt_double(c.tol) << '\n'
        << "max_iters=" << c.max_iters << '\n'
        << "starts=" << c.starts << '\n'
        << "linking_j=" << c.linking_j << '\n'
        << "epsilon=" << fmt_double(c.epsilon) << '\n'
        << "method=" << c.method << '\n'
        << "init=" << c.init << '\n'
        << "width=" << fmt_double(c.width) << '\n'
        << "center=" << fmt_grid(c.center) << '\n'
        << "seed=" << c.seed << '\n'
        << "out_dir=" << c.out_dir << '\n';
    return out.str();
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("config line without '=': " + line);
        apply_key(c, trim(t.substr(0, eq)), t.substr(eq + 1));
    }
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["kind"] = c.kind;
    j["dim"] = c.dim;
    j["mu"] = c.mu;
    j["lambda"] = c.lambda;
    j["lambda_grid"] = c.lambda_grid;
    j["shape"] = c.shape;
    j["n"] = c.n;
    j["half_width"] = c.half_width;
    j["radius"] = c.radius;
    j["delta"] = c.delta;
    j["eps_grid"] = c.eps_grid;
    j["tol"] = c.tol;
    j["max_iters"] = c.max_iters;
    j["starts"] = c.starts;
    j["linking_j"] = c.linking_j;
    j["epsilon"] = c.epsilon;
    j["method"] = c.method;
    j["init"] = c.init;
    j["width"] = c.width;
    j["center"] = c.center;
    j["seed"] = c.seed;
    j["out_dir"] = c.out_dir;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config JSON must be an object");
    ExperimentConfig c;
    try {
        for (const auto& [key, val] : j.items()) {
            if (key == "kind") c.kind = val.get<std::string>();
            else if (key == "dim") c.dim = val.get<int>();
            else if (key == "mu") c.mu = val.get<double>();
            else if (key == "lambda") c.lambda = val.get<double>();
            else if (key == "lambda_grid") c.lambda_grid = val.get<std::vector<double>>();
            else if (key == "shape") c.shape = val.get<std::string>();
            else if (key == "n") c.n = val.get<int>();
            else if (key == "half_width") c.half_width = val.get<double>();
            else if (key == "radius") c.radius = val.get<double>();
            else if (key == "delta") c.delta = val.get<double>();
            else if (key == "eps_grid") c.eps_grid = val.get<std::vector<double>>();
            else if (key == "tol") c.tol = val.get<double>();
            else if (key == "max_iters") c.max_iters = val.get<int>();
            else if (key == "starts") c.starts = val.get<int>();
            else if (key == "linking_j") c.linking_j = val.get<int>();
            else if (key == "epsilon") c.epsilon = val.get<double>();
            else if (key == "method") c.method = val.get<std::string>();
            else if (key == "init") c.init = val.get<std::string>();
            else if (key == "width") c.width = val.get<double>();
            else if (key == "center") c.center = val.get<std::vector<double>>();
            else if (key == "seed") c.seed = val.get<std::uint64_t>();
            else if (key == "out_dir") c.out_dir = val.get<std::string>();
            else throw ConfigError("unknown config key: " + key);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config JSON type mismatch: ") + e.what());
    }
    return c;
}

std::string print_config_json(const ExperimentConfig& c) {
    return config_to_json(c).dump(2) + "\n";
}

ExperimentConfig parse_config_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    return config_from_json(j);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const std::size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return parse_config_json(text);
    return parse_config_text(text);
}

void validate_config(const ExperimentConfig& c) {
    const auto bad = [](const std::string& key, const std::string& why) {
        throw ConfigError("config field " + key + ": " + why);
    };
    if (!known_kind(c.kind)) bad("kind", "unknown subcommand " + c.kind);
    if (c.dim < 3 || c.dim > 5) bad("dim", "must be 3, 4 or 5");
    if (!std::isfinite(c.mu) || c.mu <= 0.0 || c.mu >= c.dim) {
        bad("mu", "must lie strictly between 0 and dim");
    }
    if (!std::isfinite(c.lambda)) bad("lambda", "must be finite");
    for (double l : c.lambda_grid) {
        if (!std::isfinite(l)) bad("lambda_grid", "holds a nonfinite entry");
    }
    if (c.shape != "box" && c.shape != "ball") bad("shape", "must be box or ball");
    if (c.n < 4) bad("n", "needs at least 4 points per axis");
    if (!std::isfinite(c.half_width) || c.half_width <= 0.0) bad("half_width", "must be positive");
    if (c.shape == "ball" && (!std::isfinite(c.radius) || c.radius <= 0.0)) {
        bad("radius", "must be positive for a ball");
    }
    if (!std::isfinite(c.delta) || c.delta < 0.0) bad("delta", "must be nonnegative");
    for (double e : c.eps_grid) {
        if (!std::isfinite(e) || e <= 0.0) bad("eps_grid", "entries must be positive");
    }
    if (!std::isfinite(c.tol) || c.tol <= 0.0) bad("tol", "must be positive");
    if (c.max_iters < 1) bad("max_iters", "needs at least one iteration");
    if (c.starts < 1) bad("starts", "needs at least one start");
    if (c.linking_j < 1) bad("linking_j", "must be at least 1");
    if (!std::isfinite(c.epsilon) || c.epsilon < 0.0) bad("epsilon", "must be nonnegative");
    if (c.method != "critical" && c.method != "quotient") {
        bad("method", "must be critical or quotient");
    }
    if (c.init != "gaussian" && c.init != "random" && c.init != "bubble") {
        bad("init", "must be gaussian, random or bubble");
    }
    if (!std::isfinite(c.width) || c.width < 0.0) bad("width", "must be nonnegative");
    if (c.center.size() > 5) bad("center", "takes at most five coordinates");
    for (double x : c.center) {
        if (!std::isfinite(x)) bad("center", "holds a nonfinite entry");
    }
    if (c.out_dir.empty()) bad("out_dir", "must not be empty");
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

ArtifactWriter::ArtifactWriter(const std::string& out_dir) : dir_(out_dir) {
    while (dir_.size() > 1 && dir_.back() == '/') dir_.pop_back();
    if (dir_.empty()) throw IoError("empty artifact directory");
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) {
        throw IoError("cannot create artifact directory " + dir_);
    }
}

void ArtifactWriter::write_text(const std::string& name, const std::string& content) {
    if (name.empty() || name.find('/') != std::string::npos ||
        name.find('\\') != std::string::npos) {
        throw ConfigError("artifact name must be a flat file name: " + name);
    }
    const std::string path = dir_ + "/" + name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good()) throw IoError("failed writing " + path);
    const std::uint64_t h = fnv1a64(content);
    for (auto& [n, hash, bytes] : files_) {
        if (n == name) {
            hash = h;
            bytes = content.size();
            return;
        }
    }
    files_.emplace_back(name, h, content.size());
}

std::string ArtifactWriter::manifest_text(const ExperimentConfig& cfg) const {
    nlohmann::json j;
    j["schema"] = schema_tag("manifest");
    j["seed"] = cfg.seed;
    j["kind"] = cfg.kind;
    j["config"] = config_to_json(cfg);
    nlohmann::json files = nlohmann::json::array();
    for (const auto& [name, hash, bytes] : files_) {
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
        files.push_back({{"name", name}, {"fnv1a", hex}, {"bytes", bytes}});
    }
    j["files"] = files;
    return j.dump(2) + "\n";
}

void ArtifactWriter::write_manifest(const ExperimentConfig& cfg) const {
    const std::string path = dir_ + "/manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    const std::string body = manifest_text(cfg);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out.good()) throw IoError("failed writing " + path);
}

std::string schema_tag(const std::string& name) {
    return "choquard." + name + ".v1";
}

const std::vector<std::string>& schema_required_keys(const std::string& name) {
    static const std::map<std::string, std::vector<std::string>> reg = {
        {"constants",
         {"dim", "mu", "sobolev_exp", "upper_crit", "lower_crit", "hls_const", "sobolev_S",
          "nonlocal_S_HL", "ps_threshold"}},
        {"energy",
         {"schema", "dim", "mu", "lambda", "grad_sq", "l2_sq", "nonlocal_double",
          "functional_value", "quotient", "nl_norm"}},
        {"solve",
         {"schema", "seed", "lambda", "verdict", "iterations", "final_quotient", "mp_level",
          "gradient_residual", "nl_norm_final", "concentration_radius", "quotient_trace"}},
        {"probe",
         {"schema", "seed", "lambda", "multistarts", "n_trivial", "n_concentrating",
          "n_nontrivial", "n_unresolved", "runs"}},
        {"linking",
         {"schema", "seed", "lambda", "j", "epsilon", "m_value", "level", "a_epsilon",
          "gram_condition", "coefficients"}},
        {"manifest", {"schema", "seed", "kind", "config", "files"}},
    };
    const auto it = reg.find(name);
    if (it == reg.end()) throw NotFound("no schema named " + name);
    return it->second;
}

void check_schema(const std::string& name, const nlohmann::json& j) {
    const std::vector<std::string>& keys = schema_required_keys(name);
    bool wants_tag = false;
    for (const std::string& k : keys) {
        if (!j.contains(k)) throw ConfigError(name + " output misses key " + k);
        if (k == "schema") wants_tag = true;
    }
    if (wants_tag && j["schema"] != schema_tag(name)) {
        throw ConfigError(name + " output carries the wrong schema tag");
    }
}

nlohmann::json constants_json(const SharpConstants& c) {
    nlohmann::json j;
    j["dim"] = c.dim;
    j["mu"] = c.mu;
    j["sobolev_exp"] = c.sobolev_exp;
    j["upper_crit"] = c.upper_crit;
    j["lower_crit"] = c.lower_crit;
    j["hls_const"] = c.hls_const;
    j["sobolev_S"] = c.sobolev_S;
    j["nonlocal_S_HL"] = c.nonlocal_S_HL;
    j["ps_threshold"] = c.ps_threshold;
    return j;
}

nlohmann::json breakdown_json(const EnergyBreakdown& b, const SharpConstants& c,
                              double lambda) {
    nlohmann::json j;
    j["schema"] = schema_tag("energy");
    j["dim"] = c.dim;
    j["mu"] = c.mu;
    j["lambda"] = lambda;
    j["grad_sq"] = b.grad_sq;
    j["l2_sq"] = b.l2_sq;
    j["nonlocal_double"] = b.nonlocal_double;
    j["functional_value"] = b.functional_value;
    j["quotient"] = b.quotient;
    j["nl_norm"] = b.nl_norm;
    return j;
}

namespace {

nlohmann::json run_scalars(const SolveReport& rep) {
    nlohmann::json j;
    j["verdict"] = verdict_name(rep.verdict);
    j["iterations"] = rep.iterations;
    j["final_quotient"] = rep.final_quotient;
    j["mp_level"] = rep.mp_level;
    j["gradient_residual"] = rep.gradient_residual;
    j["nl_norm_final"] = rep.nl_norm_final;
    j["concentration_radius"] = rep.concentration_radius;
    return j;
}

} // namespace

nlohmann::json solve_report_json(const SolveReport& rep, std::uint64_t seed) {
    nlohmann::json j = run_scalars(rep);
    j["schema"] = schema_tag("solve");
    j["seed"] = seed;
    j["lambda"] = rep.lambda;
    j["quotient_trace"] = rep.quotient_trace;
    return j;
}

nlohmann::json probe_report_json(const ProbeReport& rep, double lambda, int multistarts,
                                 std::uint64_t seed) {
    nlohmann::json j;
    j["schema"] = schema_tag("probe");
    j["seed"] = seed;
    j["lambda"] = lambda;
    j["multistarts"] = multistarts;
    j["n_trivial"] = rep.n_trivial;
    j["n_concentrating"] = rep.n_concentrating;
    j["n_nontrivial"] = rep.n_nontrivial;
    j["n_unresolved"] = rep.n_unresolved;
    nlohmann::json runs = nlohmann::json::array();
    for (const SolveReport& r : rep.runs) runs.push_back(run_scalars(r));
    j["runs"] = runs;
    return j;
}

nlohmann::json linking_report_json(const LinkingReport& rep, std::uint64_t seed) {
    nlohmann::json j;
    j["schema"] = schema_tag("linking");
    j["seed"] = seed;
    j["lambda"] = rep.lambda;
    j["j"] = rep.j;
    j["epsilon"] = rep.epsilon;
    j["m_value"] = rep.m_value;
    j["level"] = rep.level;
    j["a_epsilon"] = rep.a_epsilon;
    j["gram_condition"] = rep.gram_condition;
    j["coefficients"] = rep.coefficients;
    return j;
}

} // namespace choquard
