#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace pstokes {

/// Local face l of the reference tetrahedron is the face opposite vertex l,
/// vertices listed in ascending local-index order. Shared by mesh topology
/// and the reference bases; the two must agree.
inline constexpr std::array<std::array<int, 3>, 4> kRefTetFaceVertices = {
    {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}};

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class MeshError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace pstokes

#define PSTOKES_REQUIRE(cond, msg)                                  \
  do {                                                              \
    if (!(cond)) throw ::pstokes::Error(std::string("pstokes: ") + (msg)); \
  } while (0)
