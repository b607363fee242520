#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "dynpr/integrate.hpp"

namespace dynpr {

/// Shortest decimal form that round-trips a double (17 significant digits cap),
/// fixed "%.17g" rendering so identical values serialize identically.
std::string format_double(double value);

/// "node,score" CSV, rows sorted by node.
void write_scores_csv(std::ostream& out, const std::vector<double>& scores);
std::vector<double> read_scores_csv(std::istream& in);

/// Long-form "t,node,score" CSV, time-major then node-major.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

/// "k,isim" CSV for a similarity profile.
void write_profile_csv(std::ostream& out, const std::vector<double>& profile);

/// "node,epoch,count" CSV for activity matrices (zeros omitted).
void write_activity_csv(std::ostream& out, const ActivityMatrix& activity);

/// "src dst" edge list with one edge per line.
void write_edge_list(std::ostream& out, const AdjacencyStructure& adj);

} // namespace dynpr
