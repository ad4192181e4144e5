#ifndef EMBEDEV_IO_HPP
#define EMBEDEV_IO_HPP

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "embedev/analysis.hpp"
#include "embedev/potentials.hpp"
#include "embedev/solver.hpp"

namespace embedev {

// Flat key=value run configuration. Files hold one `key = value` pair per
// line ('#' starts a comment); command-line flags override file values.
// The fully resolved map is echoed into every artifact.
class RunConfig {
  public:
    void load_file(const std::string& path);
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

// All floats are printed with 17 significant digits; lines end with LF.
std::string format_double(double x);

// Leading '#'-comment lines echo the resolved config, then the header row.
void write_csv_header(std::ostream& os, const RunConfig& cfg,
                      const std::vector<std::string>& columns);

void write_potential_csv(std::ostream& os, const RunConfig& cfg,
                         const std::vector<double>& V);

void write_trajectory_csv(std::ostream& os, const RunConfig& cfg, const Trajectory& traj);

// Reads a trajectory back from its CSV (samples only; partial sums are
// rebuilt from the sampled R~^2 by power-law interpolation between
// samples, which is what `analyze` re-verdicts from).
Trajectory read_trajectory_csv(const std::string& path);

std::string decay_report_json(const DecayReport& rep, const RunConfig& cfg);

std::string potential_spec_json(const PotentialSpec& spec, const RunConfig& cfg);
PotentialSpec potential_spec_from_json(const std::string& text);

std::string glue_schedule_json(const GlueResult& res, const RunConfig& cfg);

}  // namespace embedev

#endif  // EMBEDEV_IO_HPP
