#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wvlab/lab/fit.hpp"
#include "wvlab/lab/scenario.hpp"

namespace wvlab::lab {

inline constexpr const char* kReportSchema = "wvlab.run-report/1";

/// One CSV row. For the classical engine `outcome` is the q-bin index and
/// remainder_norm is not defined (NaN).
struct Record {
    std::string engine;
    std::string pointer;
    double epsilon = 0.0;
    std::size_t outcome = 0;
    double cw_re = 0.0;
    double cw_im = 0.0;
    double predicted_shift = 0.0;
    double measured_shift = 0.0;
    double abs_err = 0.0;
    double remainder_norm = 0.0;
    double weakness_ratio = 0.0;
    double current_max = 0.0;
    double marginal_drift = 0.0;
    std::vector<std::pair<std::string, bool>> flags;

    bool flags_ok() const;
    std::string flags_text() const;  // "name=1;name=0"
};

/// Per (pointer, eps) quantities that feed the convergence fits.
struct CellDiagnostics {
    std::string pointer;
    double epsilon = 0.0;
    double first_order_error = NAN;   // max |exact - first order|, NaN for current-carrying pointers
    double remainder_residual = NAN;  // max |exact - rho_0 - term_1 - term_2|
    double marginal_drift = NAN;      // max_d |p_eps(d) - p_0(d)|
    double mean_abs_shift = NAN;      // classical: mean |measured| over populated bins
    double agreement_fraction = NAN;  // classical: bins within 3 standard errors
    double invariant_drift = NAN;     // classical: conservation of c along the kick
    bool marginal_identical = false;  // classical: q unchanged sample by sample
    bool marginal_passed = true;      // classical: chi-square at 99%
    double seconds = 0.0;
};

struct FitRecord {
    std::string pointer;
    std::string quantity;
    std::optional<std::size_t> outcome;
    std::optional<SlopeFit> fit;
    std::string skipped;  // reason when no fit was possible
};

struct RunReport {
    Scenario scenario;
    std::vector<Record> records;
    std::vector<CellDiagnostics> cells;
    std::vector<FitRecord> fits;
    double seconds = 0.0;
    std::size_t workers = 1;

    bool physics_ok() const;
    nlohmann::json to_json(bool include_timings = true) const;
};

struct RunOptions {
    std::size_t workers = 1;
    std::optional<std::uint64_t> seed;
};

/// Runs every (pointer, eps) cell on a bounded worker pool and assembles the
/// records in scenario order. Errors inside a cell are rethrown with the
/// (eps, pointer) coordinates prepended.
RunReport run(const Scenario& scenario, const RunOptions& options = {});

/// Header plus one row per record; numbers in shortest round-trip form.
void write_csv(std::ostream& out, const std::vector<Record>& records);
std::string format_number(double x);

/// Writes <dir>/<csv> and <dir>/<report>, creating the directory.
void write_outputs(const RunReport& report, const std::filesystem::path& dir);

struct AuditRow {
    std::string name;
    double purity = 0.0;
    double position_std = 0.0;
    double current_max = 0.0;
    bool zero_current = false;
    bool expected_zero_current = false;

    bool ok() const { return zero_current == expected_zero_current; }
};

/// Purity, width, normalised current and verdict for every pointer preset.
std::vector<AuditRow> gallery_audit(const PointerGrid& grid = gallery::default_grid());

}  // namespace wvlab::lab
