#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "choquard/constants.hpp"
#include "choquard/energy.hpp"
#include "choquard/varsolve.hpp"

namespace choquard {

/// One experiment record: every knob of the command line tools in a flat
/// diff-friendly structure. Serialized either as key=value text or as
/// JSON; both round-trip exactly.
struct ExperimentConfig {
    std::string kind = "solve";  // subcommand name
    int dim = 3;
    double mu = 1.0;
    double lambda = 0.0;
    std::vector<double> lambda_grid;
    std::string shape = "ball";  // box | ball
    int n = 33;
    double half_width = 1.0;
    double radius = 0.95;       // shape ball only
    double delta = 0.0;         // bubble cutoff radius
    std::vector<double> eps_grid;
    double tol = 1e-6;
    int max_iters = 400;
    int starts = 8;
    int linking_j = 1;
    double epsilon = 0.1;       // bubble scale of a single run
    std::string method = "critical";  // solve engine: critical | quotient
    std::string init = "gaussian";    // start profile: gaussian | random | bubble
    double width = 0.0;               // gaussian width, 0 picks 0.3 half_width
    std::vector<double> center;       // profile center, up to five coordinates
    std::uint64_t seed = 2024;
    std::string out_dir = ".";

    bool operator==(const ExperimentConfig&) const = default;
};

/// key=value lines in a fixed order, one field per line, grids comma
/// separated, doubles at full precision.
std::string print_config_text(const ExperimentConfig& cfg);

/// Inverse of print_config_text. Blank lines and lines starting with '#'
/// are skipped; an unknown key or an unparsable value throws ConfigError.
/// Missing keys keep their defaults.
ExperimentConfig parse_config_text(const std::string& text);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const nlohmann::json& j);
std::string print_config_json(const ExperimentConfig& cfg);
ExperimentConfig parse_config_json(const std::string& text);

/// Reads a config file in either format, decided by the first nonspace
/// byte ('{' means JSON). Throws IoError when unreadable.
ExperimentConfig load_config(const std::string& path);

/// Range-checks every field against the module preconditions it will hit
/// downstream, before any compute starts. Throws ConfigError naming the
/// offending key.
void validate_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// Collects experiment artifacts in one directory and records a content
/// hash per file, so a run can close with a manifest listing everything
/// it produced. File names are flat (no separators).
class ArtifactWriter {
  public:
    /// Creates the directory if needed. Throws IoError on failure.
    explicit ArtifactWriter(const std::string& out_dir);

    const std::string& dir() const { return dir_; }

    /// Writes dir()/name and records its hash. Throws ConfigError on a
    /// name with a path separator, IoError on write failure.
    void write_text(const std::string& name, const std::string& content);

    /// Manifest JSON: schema tag, seed, kind, the full config, and the
    /// recorded files with fnv1a hashes (hex) and byte counts.
    std::string manifest_text(const ExperimentConfig& cfg) const;

    /// Writes dir()/manifest.json; the manifest does not list itself.
    void write_manifest(const ExperimentConfig& cfg) const;

  private:
    std::string dir_;
    std::vector<std::tuple<std::string, std::uint64_t, std::uint64_t>> files_;
};

/// Versioned output schemas. Each named schema lists the keys a JSON
/// document of that name must carry; documents other than the constants
/// bundle also carry a "schema" member equal to schema_tag(name).
std::string schema_tag(const std::string& name);

/// Required keys of a named schema. Known names: constants, energy,
/// solve, probe, linking, manifest. Throws NotFound otherwise.
const std::vector<std::string>& schema_required_keys(const std::string& name);

/// Checks presence of every required key and the schema tag when the
/// schema demands one. Throws ConfigError on a violation.
void check_schema(const std::string& name, const nlohmann::json& j);

/// The constants bundle with exactly the nine documented keys.
nlohmann::json constants_json(const SharpConstants& c);

nlohmann::json breakdown_json(const EnergyBreakdown& b, const SharpConstants& c,
                              double lambda);
nlohmann::json solve_report_json(const SolveReport& rep, std::uint64_t seed);
nlohmann::json probe_report_json(const ProbeReport& rep, double lambda, int multistarts,
                                 std::uint64_t seed);
nlohmann::json linking_report_json(const LinkingReport& rep, std::uint64_t seed);

} // namespace choquard
