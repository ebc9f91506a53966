// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Error types. Every failure surfaced by the library derives from nlsqi::Error.

#ifndef NLSQI_ERRORS_HPP
#define NLSQI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nlsqi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Collocation grid too coarse for an exact (alias-free) product.
class GridTooSmall : public Error {
 public:
  GridTooSmall(int have, int need)
      : Error("grid too small: " + std::to_string(have) + " points, need at least " +
              std::to_string(need)),
        have_(have),
        need_(need) {}
  int have() const noexcept { return have_; }
  int need() const noexcept { return need_; }

 private:
  int have_;
  int need_;
};

class TruncationExceedsAmbient : public Error {
 public:
  TruncationExceedsAmbient(int n_cut, int m_ambient)
      : Error("truncation N=" + std::to_string(n_cut) + " exceeds ambient M=" +
              std::to_string(m_ambient)) {}
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class ContractionRadiusExceeded : public Error {
 public:
  using Error::Error;
};

class MissingCutoff : public Error {
 public:
  MissingCutoff() : Error("measure has no cutoff radius R") {}
};

class BoundViolated : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  ConfigInvalid(const std::string& key, const std::string& why)
      : Error("invalid config key '" + key + "': " + why), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace nlsqi

#endif  // NLSQI_ERRORS_HPP
