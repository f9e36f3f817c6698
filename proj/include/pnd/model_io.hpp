#pragma once

#include <iosfwd>
#include <string>
#include <variant>

#include "pnd/forest.hpp"
#include "pnd/glm.hpp"

namespace pnd {

using Model = std::variant<Forest, GlmModel>;

inline constexpr int kModelFormatVersion = 1;

// Versioned JSON: kind, feature names, config echo, imputation medians and
// either flat tree arrays or coefficients, plus a 64-bit FNV-1a checksum
// over the serialized body.
std::string serialize_model(const Model& model);

// Throws ModelError on version, checksum or feature-list mismatch.
Model deserialize_model(const std::string& text);

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);

// Pump likelihood of one observation under either model kind.
double predict(const Model& model, const FeatureVector& fv);
std::vector<double> predict_all(const Model& model, const Dataset& dataset, unsigned threads = 1);

}  // namespace pnd
