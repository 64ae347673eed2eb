#pragma once

#include <cstdint>
#include <string>

#include "semann/model_spec.hpp"
#include "semann/synth.hpp"

namespace semann {

/// Model description shipped with the library: eleven constructs measured by
/// 43 five-point items, seven demographic covariates, an observed gap
/// outcome, the directional hypothesis list, and the mediation chains the
/// default analysis reports on.
const std::string& bundled_model_text();

ModelSpec bundled_model();

/// Generating truth for the bundled model with standardized latents:
/// reference loadings per item, a plausible exogenous correlation block,
/// reference structural coefficients, and a positive seconds-scale outcome.
SynthTruth bundled_truth(int n = 603, std::uint64_t seed = 1,
                         bool discretize_items = true);

}  // namespace semann
