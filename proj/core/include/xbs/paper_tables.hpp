#pragma once
#include <cstdint>

#include "xbs/conditions.hpp"

namespace xbs::paper_tables {

/// Hand-transcribed rows of the published condition tables. The derivation
/// pipeline is tested for semantic equivalence against these.
ConditionSet transcription(TableId id);

/// Transcribed gamma-tilde displays (k = 0, 1, 2) over the free coefficients.
Series gamma_transcription(int k);

/// Replacement rows for the perturbed equation when f2 = J grad V.
std::vector<Equation> non_reversible_j_rows();

/// FNV-1a hash of every shipped transcription; the CLI prints it as the
/// table-convention fingerprint.
std::uint64_t fingerprint();

} // namespace xbs::paper_tables
