#pragma once
// Sweep dataset files.
//
// UTF-8 CSV with exactly these columns, in this order:
//   model,j_prime,control,n_total,energy,e1,e2,pi_a,pi_b,pi_c,
//   n_a_bc,n_b_ac,n_c_ab,n_ab,n_ac,n_bc,converged
// model is 2ikm or 2ckm, n_total an integer, converged true/false. Reals are
// written with 17 significant digits; "nan" marks values that were not
// computed (e.g. pairwise terms of an E1-only sweep). Files produced by
// other solvers (DMRG tables) are accepted as long as they follow the schema.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "impent/sweep.hpp"

namespace impent {

inline constexpr std::string_view kDatasetHeader =
    "model,j_prime,control,n_total,energy,e1,e2,pi_a,pi_b,pi_c,n_a_bc,n_b_ac,n_c_ab,n_ab,n_ac,n_bc,converged";

/// %.17g, with "nan" / "inf" / "-inf" for non-finite values.
std::string format_real(double value);

void write_dataset(std::span<const SweepRecord> records, std::ostream& out);
void write_dataset(std::span<const SweepRecord> records, const std::filesystem::path& path);

/// Throws ParseError naming the line and the first bad field.
std::vector<SweepRecord> read_dataset(std::istream& in);
std::vector<SweepRecord> read_dataset(const std::filesystem::path& path);

}  // namespace impent
