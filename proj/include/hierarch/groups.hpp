#pragma once

// Finite group presentations: words, length, abelianization through Smith
// normal form, amalgamated products and suspensions, and the census of short
// presentations.
//
// Words are sequences of signed generator indices (+i for x_i, -i for its
// inverse). In text, generators 1..26 are a..z and 27..52 are A..Z; an
// inverse is the letter followed by '. The empty word is written "1".

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hierarch/bigint.hpp"

namespace hierarch::groups {

using Letter = std::int32_t;
using Word = std::vector<Letter>;

Word parse_word(std::string_view text);
std::string format_word(const Word& w);

Word free_reduce(const Word& w);
Word cyclic_reduce(const Word& w);
Word inverse(const Word& w);
bool is_cyclically_reduced(const Word& w);

/// Shortlex with letters ordered a < a' < b < b' < ...
bool shortlex_less(const Word& a, const Word& b);

class FinitePresentation {
public:
    /// Relators are freely reduced; a relator that reduces to the empty word
    /// is rejected, as is any letter outside 1..generators.
    FinitePresentation(std::size_t generators, std::vector<Word> relators);

    /// "gens: k" followed by one relator per line; blank lines and lines
    /// starting with '#' are ignored.
    static FinitePresentation parse(std::string_view text);
    std::string to_text() const;

    std::size_t generators() const noexcept { return generators_; }
    const std::vector<Word>& relators() const noexcept { return relators_; }

    friend bool operator==(const FinitePresentation&, const FinitePresentation&) = default;

private:
    std::size_t generators_;
    std::vector<Word> relators_;
};

/// Number of generators plus the total length of the relators.
std::size_t presentation_length(const FinitePresentation& p);

/// Throws ValidationError if `w` uses a generator outside 1..generators.
void check_word(const Word& w, std::size_t generators);

// ---------------------------------------------------------------------------
// Smith normal form

using Matrix = std::vector<std::vector<BigInt>>;

struct SNFResult {
    Matrix D, U, V;               ///< U * M * V = D
    std::size_t rank = 0;
    std::vector<BigInt> torsion;  ///< diagonal entries > 1, in order
    /// Nonzero diagonal entries d1 | d2 | ..., all positive.
    std::vector<BigInt> invariant_factors;
};

Matrix identity(std::size_t n);
Matrix multiply(const Matrix& a, const Matrix& b, std::size_t inner);
/// Exact determinant (fraction-free elimination); square matrices only.
BigInt determinant(const Matrix& m);

/// Pivot strategy: at each step the smallest nonzero absolute value in the
/// remaining block, ties broken by (row, column). `cols` is needed when the
/// matrix has no rows.
SNFResult smith_normal_form(const Matrix& m, std::size_t cols);
SNFResult smith_normal_form(const Matrix& m);

/// Relators x generators matrix of exponent sums.
Matrix exponent_matrix(const FinitePresentation& p);

struct BettiOne {
    std::size_t b1 = 0;
    std::vector<BigInt> torsion;
};

BettiOne betti_one(const FinitePresentation& p);

// ---------------------------------------------------------------------------
// Amalgamation

/// P1's generators first, then P2's shifted by P1.generators(). For each t
/// the relator images1[t] * images2[t]^-1 is appended (dropped if it reduces
/// to the empty word). Empty image lists give the free product.
FinitePresentation amalgamated_product(const FinitePresentation& p1, const FinitePresentation& p2,
                                       const std::vector<Word>& images1, const std::vector<Word>& images2);

/// A *_G A, with G embedded in A by `embedding` (one word per generator of G).
FinitePresentation suspension(const FinitePresentation& g, const FinitePresentation& a,
                              const std::vector<Word>& embedding);

/// S^k G. `embeddings[j]` embeds the level-j group (S^j G) into `a`; missing
/// or short levels throw EmbeddingRequired.
FinitePresentation iterated_suspension(const FinitePresentation& g, const FinitePresentation& a,
                                       const std::vector<std::vector<Word>>& embeddings, std::size_t k);

/// <a,b,c,d | bab^-1a^-2, cbc^-1b^-2, dcd^-1c^-2, ada^-1d^-2>, an acyclic group
/// (acyclicity is a known fact, not checked here).
FinitePresentation higman_group();

// ---------------------------------------------------------------------------
// Census

inline constexpr std::size_t kCensusCap = 8;

/// Canonical form: relators cyclically reduced and sorted shortlex, then the
/// least such list (lexicographic over shortlex) among all generator
/// permutations and inversions. Relators are not identified up to rotation
/// or inversion.
FinitePresentation canonical_presentation(const FinitePresentation& p);

struct PresentationCensus {
    std::size_t max_length = 0;
    std::vector<FinitePresentation> presentations;  ///< by length, then canonical order
    std::size_t count() const noexcept { return presentations.size(); }
};

/// All canonical presentations with at least one generator and length <= N.
/// Throws CapExceeded above kCensusCap.
PresentationCensus enumerate_presentations(std::size_t max_length);

}  // namespace hierarch::groups
