#pragma once

#include <cmath>

namespace mfris {

// All internal computation uses linear SI units (watts, meters).
// Decibel quantities appear only at configuration / reporting boundaries.

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

inline double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

} // namespace mfris
