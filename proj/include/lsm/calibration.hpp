// Frozen audit constants.  The shape bounds carry unspecified absolute
// constants; we fit them once on a seed grid (observed maximum ratio times a
// 1.5 safety margin) and freeze the result in a plain-text key-value file
// shipped with the repository.  Audits then check against the frozen values.
#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace lsm {

struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

struct Calibration {
    std::map<std::string, double> values;
    double at(const std::string& key) const;
};

// the file bundled with the source tree, resolved at configure time
std::string default_calibration_path();

Calibration load_calibration(const std::string& path = "");
void write_calibration(const std::string& path, const Calibration& cal);

// observed maxima of every grid-audited bound ratio, keyed like the
// calibration file; shared between the audits and the refit
std::map<std::string, double> audit_maxima();

// recompute every constant on its seed grid; takes a few minutes
Calibration run_calibration();

} // namespace lsm
