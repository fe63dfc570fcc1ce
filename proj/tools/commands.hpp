#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bspade::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Error carrying the process exit code it should map to.
class CliError : public std::runtime_error
{
 public:
  CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

/// How separation values in configs, grids and counts-file labels are read.
///   d     : per-arm adimensional shift (default)
///   delta : total adimensional separation, d = delta / 2
///   um    : per-arm physical shift in micrometres; needs schmidt_waist_um
enum class SepConvention { D, Delta, Micrometre };

const char* to_string(SepConvention c);
SepConvention parse_convention(const std::string& s);

struct RunConfig
{
  std::optional<double> gamma;
  std::optional<double> pump_waist_um;
  std::optional<double> crystal_length_mm;
  std::optional<double> pump_wavelength_nm;
  std::optional<double> schmidt_waist_um;

  int modes_k = 6;
  int modes_l = 0;

  std::optional<double> sep_start;
  std::optional<double> sep_stop;
  std::optional<double> sep_step;
  SepConvention sep_convention = SepConvention::D;

  std::int64_t photons = 37000;
  int trials = 200;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = ".";
  unsigned threads = 0;

  std::vector<double> k_values;
  std::vector<double> gamma_values;

  bool calibrate = false;
  // Uniform detector response used by `simulate`.
  double alpha = 1.0;
  double beta = 0.0;

  /// Sets one key from a config file or flag; throws CliError(kUsage).
  void set(const std::string& key, const std::string& value);

  /// gamma, from the direct value or the physical parameters (default 0.15).
  double resolved_gamma() const;
  void validate() const;

  /// Converts a separation in the configured convention to per-arm d.
  double to_d(double value) const;
};

/// Reads `key = value` lines; `#` starts a comment.
void load_config_file(RunConfig& config, const std::filesystem::path& path);

/// Separation grid in per-arm d. Unset bounds take the given defaults, which
/// are expressed in the d convention.
std::vector<double> separation_grid(const RunConfig& config, double default_start, double default_stop,
                                    double default_step);

/// Long-format counts file: rows k_idler,l_idler,k_signal,l_signal,count.
struct CountsFile
{
  struct Row
  {
    int k_idler;
    int l_idler;
    int k_signal;
    int l_signal;
    std::int64_t count;
  };
  std::filesystem::path path;
  std::vector<Row> rows;
  std::optional<double> separation; // raw label, in `convention`
  std::optional<SepConvention> convention;
  std::optional<double> duration;
};

/// Throws CliError(kData) naming the file on any format problem.
CountsFile read_counts_file(const std::filesystem::path& path);
void write_counts_file(const std::filesystem::path& path, const CountsFile& file);

int cmd_crlb_curves(const RunConfig& config, std::ostream& log);
int cmd_matrices(const RunConfig& config, std::ostream& log);
int cmd_estimate(const RunConfig& config, const std::vector<std::filesystem::path>& files, std::ostream& log);
int cmd_compare(const RunConfig& config, std::ostream& log);
int cmd_simulate(const RunConfig& config, std::ostream& log);

} // namespace bspade::cli
