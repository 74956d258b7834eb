#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coarsebundle {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define COARSEBUNDLE_ERROR(Name, Message)                                \
  class Name : public Error {                                            \
   public:                                                               \
    Name() : Error(Message) {}                                           \
    explicit Name(std::string const& detail)                             \
        : Error(std::string(Message) + ": " + detail) {}                 \
  };

COARSEBUNDLE_ERROR(SingularMatrix, "singular matrix")
COARSEBUNDLE_ERROR(IndexOutOfRange, "index out of range")
COARSEBUNDLE_ERROR(Disconnected, "graph is disconnected")
COARSEBUNDLE_ERROR(RankMismatch, "matrix size does not match rank")
COARSEBUNDLE_ERROR(ZeroParameter, "parameter must be nonzero")
COARSEBUNDLE_ERROR(NotUnimodular, "matrix is not unimodular")
COARSEBUNDLE_ERROR(LoopEdge, "cannot collapse a loop")
COARSEBUNDLE_ERROR(NoUnimodularEnd, "edge has no unimodular end")
COARSEBUNDLE_ERROR(BallTooLarge, "ball exceeds the vertex cap")
COARSEBUNDLE_ERROR(EdgeNotInBall, "edge is not in the ball")
COARSEBUNDLE_ERROR(EmptyHalfspace, "halfspace is empty")
COARSEBUNDLE_ERROR(NotInLattice, "matrix is not in GL(2,Z) with |det| = 1")
COARSEBUNDLE_ERROR(ZeroValue, "zero is not in the multiplicative group")
COARSEBUNDLE_ERROR(DimensionTooSmall, "dimension must be at least 2")
COARSEBUNDLE_ERROR(NotCoboundary, "cochain is not a coboundary")
COARSEBUNDLE_ERROR(NonBijectiveTabulated, "tabulated map is not bijective")
COARSEBUNDLE_ERROR(WindowTooLarge, "window exceeds the vertex cap")
COARSEBUNDLE_ERROR(TooFewRadii, "need at least 8 valid radii")
COARSEBUNDLE_ERROR(SingularGenerator, "generator is singular")
COARSEBUNDLE_ERROR(RankUnsupported, "only ranks 1 and 2 are supported")
COARSEBUNDLE_ERROR(NotDiagonalizable, "word matrix is not diagonalizable")
COARSEBUNDLE_ERROR(ParseError, "parse error")
COARSEBUNDLE_ERROR(InvalidArgument, "invalid argument")

#undef COARSEBUNDLE_ERROR

class SingularInclusion : public Error {
 public:
  explicit SingularInclusion(std::string edge)
      : Error("singular inclusion on edge " + edge), edge_id(std::move(edge)) {}
  std::string edge_id;
};

}  // namespace coarsebundle
