#ifndef QPL_REPORT_IO_HPP
#define QPL_REPORT_IO_HPP

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "qpl/contours.hpp"
#include "qpl/experiments.hpp"
#include "qpl/levelset.hpp"
#include "qpl/potential.hpp"

namespace qpl {

nlohmann::json to_json(const Vec2& v);
nlohmann::json to_json(const LatticeVec& v);
nlohmann::json to_json(const MagicAngle& a);
nlohmann::json to_json(const ApproximantSequence& s);
nlohmann::json to_json(const SymmetricPotential& v);
nlohmann::json to_json(const SymmetryReport& r);
nlohmann::json to_json(const PercolationResult& p);
nlohmann::json to_json(const OpenInterval& oi);
/// Component statistics without the label grid; at most `max_components` entries
/// (largest first), the rest summarized.
nlohmann::json to_json(const ComponentSet& set, std::size_t max_components = 200);
nlohmann::json to_json(const ContourSet& cs, const ContourGraph& graph);
nlohmann::json to_json(const BracketSequence& s);
nlohmann::json to_json(const ScalingReport& r);
nlohmann::json to_json(const Lemma31Report& r);
nlohmann::json to_json(const IntervalReport& r);

/// Columns: c, c_minus_c0, d, window, clipped.
void write_scaling_csv(std::ostream& os, const ScalingReport& r);

/// Pretty-printed with a trailing newline; throws on I/O failure.
void write_text_file(const std::string& path, const std::string& text);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace qpl

#endif  // QPL_REPORT_IO_HPP
