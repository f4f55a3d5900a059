#pragma once

#include <string>
#include <vector>

#include "mirrorfreq/simcore.hpp"
#include "mirrorfreq/stability.hpp"
#include "mirrorfreq/sweep.hpp"

namespace mirrorfreq::io {

// ----------------------------------------------------------------------------
// Formatting primitives
// ----------------------------------------------------------------------------

/// Fixed 12-significant-digit shortest form ("%.12g"); used by every CSV
/// writer so result files are byte-stable across reruns.
std::string format_double(double v);

/// RFC 4180 field quoting (commas, quotes, CR or LF force double-quoting).
std::string csv_escape(const std::string& field);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// ----------------------------------------------------------------------------
// Case configuration
// ----------------------------------------------------------------------------

std::string case_config_to_json(const simcore::CaseConfig& cfg);
simcore::CaseConfig case_config_from_json(const std::string& text);

/// Preset name (A1, A2, B, oracle-rl) or path of a JSON config file.
simcore::CaseConfig load_case(const std::string& name_or_path);

// ----------------------------------------------------------------------------
// Sweep results
// ----------------------------------------------------------------------------

std::string sweep_to_json(const sweep::SweepResult& res);
sweep::SweepResult sweep_from_json(const std::string& text);

/// One CSV row per frequency point: frequencies, status, condition numbers,
/// and all four 2x2 matrices as magnitude/phase-degree pairs.
std::string sweep_to_csv(const sweep::SweepResult& res);

// ----------------------------------------------------------------------------
// Stability artifacts
// ----------------------------------------------------------------------------

std::string loci_to_csv(const stability::Loci& loci);

struct GncReport {
  std::string case_name;
  std::string domain;     // dq | pn | original
  std::string injection;  // shunt | series
  std::vector<double> f_dq;
  stability::GncSettings settings{};
  stability::GncResult result{};
};
std::string gnc_to_json(const GncReport& report);

// ----------------------------------------------------------------------------
// Analysis reports
// ----------------------------------------------------------------------------

std::string original_comparison_to_csv(const std::vector<sweep::OriginalComparisonRow>& rows);

/// Mirror-frequency-decoupling classification of every measured matrix.
std::string mfd_report_to_csv(const sweep::SweepResult& res, double rel_tol = 0.05);

/// Time-domain record dump, keeping every decimate-th sample.
std::string timeseries_to_csv(const simcore::SimRecord& rec, int decimate = 1);

// ----------------------------------------------------------------------------
// Run manifest (the only artifact that carries a timestamp)
// ----------------------------------------------------------------------------

std::string manifest_json(const std::string& command,
                          const std::vector<std::string>& output_files);

}  // namespace mirrorfreq::io
