// Copyright (C) 2026 The latsearch Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

namespace latsearch {

// A latent is a (frames x dims) row-major block; row f is frame f.
template <typename Scalar>
using LatentT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Latent = LatentT<double>;

struct Video {
  Latent frames;
};

// Prompt identity: a mixture component index, or the null prompt used for the
// unconditional branch of classifier-free guidance.
class Condition {
 public:
  Condition() = default;
  static Condition null() { return Condition{}; }
  static Condition prompt(int index) { return Condition{index}; }

  bool is_null() const { return !index_.has_value(); }
  int index() const {
    if (!index_) throw std::invalid_argument("Condition: null condition has no index");
    return *index_;
  }
  // Position in a (K+1)-wide one-hot layout; Null occupies slot K.
  int slot(int components) const { return index_ ? *index_ : components; }

  friend bool operator==(const Condition&, const Condition&) = default;

 private:
  explicit Condition(int index) : index_(index) {}
  std::optional<int> index_;
};

// Thrown when an input has no well-defined answer (e.g. cosine of a zero vector).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class CalibrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_finite(const Latent& z, const char* what) {
  if (!z.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

inline void require_same_shape(const Latent& a, const Latent& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

}  // namespace latsearch
