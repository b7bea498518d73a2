#include "hierarch/groups.hpp"

#include <algorithm>
#include <numeric>
#include <optional>

#include "hierarch/errors.hpp"
#include "text.hpp"

namespace hierarch::groups {

// --- Words ----------------------------------------------------------------------

Word parse_word(std::string_view src) {
    src = text::trim(src);
    if (src == "1") return {};
    if (src.empty()) throw ValidationError("empty word (write the identity as 1)");
    Word w;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const char c = src[i];
        Letter g;
        if (c >= 'a' && c <= 'z') g = c - 'a' + 1;
        else if (c >= 'A' && c <= 'Z') g = c - 'A' + 27;
        else throw ValidationError("bad letter '" + std::string(1, c) + "' in word " + std::string(src));
        if (i + 1 < src.size() && src[i + 1] == '\'') {
            g = -g;
            ++i;
        }
        w.push_back(g);
    }
    return w;
}

std::string format_word(const Word& w) {
    if (w.empty()) return "1";
    std::string out;
    for (auto l : w) {
        const auto g = l < 0 ? -l : l;
        if (g < 1 || g > 52) throw ValidationError("generator " + std::to_string(g) + " has no letter");
        out.push_back(static_cast<char>(g <= 26 ? 'a' + g - 1 : 'A' + g - 27));
        if (l < 0) out.push_back('\'');
    }
    return out;
}

Word free_reduce(const Word& w) {
    Word out;
    for (auto l : w) {
        if (!out.empty() && out.back() == -l) out.pop_back();
        else out.push_back(l);
    }
    return out;
}

Word cyclic_reduce(const Word& w) {
    Word r = free_reduce(w);
    std::size_t lo = 0, hi = r.size();
    while (hi - lo >= 2 && r[lo] == -r[hi - 1]) {
        ++lo;
        --hi;
    }
    return Word(r.begin() + static_cast<std::ptrdiff_t>(lo), r.begin() + static_cast<std::ptrdiff_t>(hi));
}

Word inverse(const Word& w) {
    Word out(w.rbegin(), w.rend());
    for (auto& l : out) l = -l;
    return out;
}

bool is_cyclically_reduced(const Word& w) {
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i] == -w[i + 1]) return false;
    return w.size() < 2 || w.front() != -w.back();
}

namespace {

int letter_rank(Letter l) { return l > 0 ? 2 * (l - 1) : 2 * (-l - 1) + 1; }

}  // namespace

bool shortlex_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return letter_rank(a[i]) < letter_rank(b[i]);
    return false;
}

void check_word(const Word& w, std::size_t generators) {
    for (auto l : w) {
        const auto g = static_cast<std::size_t>(l < 0 ? -static_cast<std::int64_t>(l) : l);
        if (l == 0 || g > generators)
            throw ValidationError("word " + format_word(w) + " uses a generator outside 1.." + std::to_string(generators));
    }
}

// --- Presentations --------------------------------------------------------------

FinitePresentation::FinitePresentation(std::size_t generators, std::vector<Word> relators)
    : generators_(generators) {
    relators_.reserve(relators.size());
    for (auto& r : relators) {
        check_word(r, generators_);
        auto reduced = free_reduce(r);
        if (reduced.empty()) throw ValidationError("relator reduces to the empty word");
        relators_.push_back(std::move(reduced));
    }
}

FinitePresentation FinitePresentation::parse(std::string_view src) {
    std::optional<std::size_t> gens;
    std::vector<Word> relators;
    for (auto line : text::split(src, '\n')) {
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!gens) {
            if (line.substr(0, 5) != "gens:") throw ValidationError("presentation must start with 'gens: k'");
            gens = text::parse_int<std::size_t>(line.substr(5), "generator count");
            continue;
        }
        relators.push_back(parse_word(line));
    }
    if (!gens) throw ValidationError("presentation must start with 'gens: k'");
    return FinitePresentation(*gens, std::move(relators));
}

std::string FinitePresentation::to_text() const {
    std::string out = "gens: " + std::to_string(generators_) + "\n";
    for (const auto& r : relators_) out += format_word(r) + "\n";
    return out;
}

std::size_t presentation_length(const FinitePresentation& p) {
    std::size_t n = p.generators();
    for (const auto& r : p.relators()) n += r.size();
    return n;
}

// --- Matrices -------------------------------------------------------------------

Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<BigInt>(n));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t inner) {
    const std::size_t cols = b.empty() ? 0 : b[0].size();
    Matrix out(a.size(), std::vector<BigInt>(cols));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < inner; ++k)
            if (a[i][k] != 0)
                for (std::size_t j = 0; j < cols; ++j) out[i][j] += a[i][k] * b[k][j];
    return out;
}

BigInt determinant(const Matrix& m) {
    const std::size_t n = m.size();
    for (const auto& row : m)
        if (row.size() != n) throw ShapeError("determinant of a non-square matrix");
    if (n == 0) return 1;
    // Bareiss elimination: every intermediate division is exact.
    Matrix a = m;
    BigInt sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t r = k + 1;
            while (r < n && a[r][k] == 0) ++r;
            if (r == n) return 0;
            std::swap(a[k], a[r]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i)
            for (std::size_t j = k + 1; j < n; ++j) a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

namespace {

// Elementary operations applied to the working matrix and mirrored into U
// (rows) or V (columns).
struct Reducer {
    Matrix a, u, v;
    std::size_t rows, cols;

    void swap_rows(std::size_t i, std::size_t j) {
        std::swap(a[i], a[j]);
        std::swap(u[i], u[j]);
    }
    void swap_cols(std::size_t i, std::size_t j) {
        for (auto& r : a) std::swap(r[i], r[j]);
        for (auto& r : v) std::swap(r[i], r[j]);
    }
    // row_i += q * row_j
    void add_row(std::size_t i, std::size_t j, const BigInt& q) {
        for (std::size_t c = 0; c < cols; ++c) a[i][c] += q * a[j][c];
        for (std::size_t c = 0; c < rows; ++c) u[i][c] += q * u[j][c];
    }
    // col_i += q * col_j
    void add_col(std::size_t i, std::size_t j, const BigInt& q) {
        for (std::size_t r = 0; r < rows; ++r) a[r][i] += q * a[r][j];
        for (std::size_t r = 0; r < cols; ++r) v[r][i] += q * v[r][j];
    }
    void negate_row(std::size_t i) {
        for (auto& x : a[i]) x = -x;
        for (auto& x : u[i]) x = -x;
    }

    // Smallest nonzero |entry| in the block starting at (t, t), ties by position.
    bool pivot_to(std::size_t t) {
        std::size_t pr = rows, pc = cols;
        BigInt best;
        for (std::size_t r = t; r < rows; ++r)
            for (std::size_t c = t; c < cols; ++c) {
                if (a[r][c] == 0) continue;
                BigInt m = abs(a[r][c]);
                if (pr == rows || m < best) {
                    best = m;
                    pr = r;
                    pc = c;
                }
            }
        if (pr == rows) return false;
        if (pr != t) swap_rows(pr, t);
        if (pc != t) swap_cols(pc, t);
        return true;
    }

    bool line_clear(std::size_t t) const {
        for (std::size_t r = t + 1; r < rows; ++r)
            if (a[r][t] != 0) return false;
        for (std::size_t c = t + 1; c < cols; ++c)
            if (a[t][c] != 0) return false;
        return true;
    }

    void run() {
        const std::size_t n = std::min(rows, cols);
        for (std::size_t t = 0; t < n; ++t) {
            if (!pivot_to(t)) break;
            for (;;) {
                const BigInt p = a[t][t];
                for (std::size_t r = t + 1; r < rows; ++r)
                    if (a[r][t] != 0) add_row(r, t, -(a[r][t] / p));
                for (std::size_t c = t + 1; c < cols; ++c)
                    if (a[t][c] != 0) add_col(c, t, -(a[t][c] / p));
                if (!line_clear(t)) {
                    // Remainders are smaller than the pivot; pick again.
                    pivot_to(t);
                    continue;
                }
                // Enforce divisibility of the rest of the block by the pivot.
                bool divides = true;
                for (std::size_t r = t + 1; r < rows && divides; ++r)
                    for (std::size_t c = t + 1; c < cols; ++c)
                        if (a[r][c] % p != 0) {
                            add_row(t, r, 1);
                            divides = false;
                            break;
                        }
                if (divides) break;
            }
            if (a[t][t] < 0) negate_row(t);
        }
    }
};

}  // namespace

SNFResult smith_normal_form(const Matrix& m, std::size_t cols) {
    for (const auto& row : m)
        if (row.size() != cols) throw ShapeError("matrix rows have inconsistent lengths");
    Reducer red{m, identity(m.size()), identity(cols), m.size(), cols};
    red.run();
    SNFResult out;
    for (std::size_t i = 0; i < std::min(red.rows, cols); ++i) {
        const auto& d = red.a[i][i];
        if (d == 0) continue;
        ++out.rank;
        out.invariant_factors.push_back(d);
        if (d > 1) out.torsion.push_back(d);
    }
    out.D = std::move(red.a);
    out.U = std::move(red.u);
    out.V = std::move(red.v);
    return out;
}

SNFResult smith_normal_form(const Matrix& m) { return smith_normal_form(m, m.empty() ? 0 : m[0].size()); }

Matrix exponent_matrix(const FinitePresentation& p) {
    Matrix m(p.relators().size(), std::vector<BigInt>(p.generators()));
    for (std::size_t i = 0; i < p.relators().size(); ++i)
        for (auto l : p.relators()[i]) {
            if (l > 0) m[i][static_cast<std::size_t>(l - 1)] += 1;
            else m[i][static_cast<std::size_t>(-l - 1)] -= 1;
        }
    return m;
}

BettiOne betti_one(const FinitePresentation& p) {
    const auto snf = smith_normal_form(exponent_matrix(p), p.generators());
    return {p.generators() - snf.rank, snf.torsion};
}

// --- Amalgamation ---------------------------------------------------------------

namespace {

Word shifted(const Word& w, std::size_t by) {
    Word out(w);
    for (auto& l : out) l = l > 0 ? l + static_cast<Letter>(by) : l - static_cast<Letter>(by);
    return out;
}

}  // namespace

FinitePresentation amalgamated_product(const FinitePresentation& p1, const FinitePresentation& p2,
                                       const std::vector<Word>& images1, const std::vector<Word>& images2) {
    if (images1.size() != images2.size())
        throw ShapeError("image lists differ in length (" + std::to_string(images1.size()) + " vs " +
                         std::to_string(images2.size()) + ")");
    for (const auto& w : images1) check_word(w, p1.generators());
    for (const auto& w : images2) check_word(w, p2.generators());
    const auto shift = p1.generators();
    std::vector<Word> relators = p1.relators();
    for (const auto& r : p2.relators()) relators.push_back(shifted(r, shift));
    for (std::size_t t = 0; t < images1.size(); ++t) {
        Word r = images1[t];
        const auto tail = inverse(shifted(images2[t], shift));
        r.insert(r.end(), tail.begin(), tail.end());
        r = free_reduce(r);
        if (!r.empty()) relators.push_back(std::move(r));
    }
    return FinitePresentation(p1.generators() + p2.generators(), std::move(relators));
}

FinitePresentation suspension(const FinitePresentation& g, const FinitePresentation& a,
                              const std::vector<Word>& embedding) {
    if (embedding.size() != g.generators())
        throw EmbeddingRequired("embedding gives " + std::to_string(embedding.size()) + " images for " +
                                std::to_string(g.generators()) + " generators");
    return amalgamated_product(a, a, embedding, embedding);
}

FinitePresentation iterated_suspension(const FinitePresentation& g, const FinitePresentation& a,
                                       const std::vector<std::vector<Word>>& embeddings, std::size_t k) {
    FinitePresentation current = g;
    for (std::size_t level = 0; level < k; ++level) {
        if (level >= embeddings.size())
            throw EmbeddingRequired("no embedding supplied for suspension level " + std::to_string(level + 1));
        try {
            current = suspension(current, a, embeddings[level]);
        } catch (const EmbeddingRequired& e) {
            throw EmbeddingRequired("level " + std::to_string(level + 1) + ": " + e.what());
        }
    }
    return current;
}

FinitePresentation higman_group() {
    return FinitePresentation::parse("gens: 4\nbab'a'a'\ncbc'b'b'\ndcd'c'c'\nada'd'd'\n");
}

// --- Census ---------------------------------------------------------------------

namespace {

bool relators_less(const std::vector<Word>& a, const std::vector<Word>& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), shortlex_less);
}

void sort_relators(std::vector<Word>& rs) { std::sort(rs.begin(), rs.end(), shortlex_less); }

// Least relator list over all signed permutations of `k` generators.
std::vector<Word> least_image(std::size_t k, const std::vector<Word>& relators) {
    std::vector<Letter> perm(k);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<Word> best;
    bool have = false;
    std::vector<Word> image(relators.size());
    do {
        for (std::uint64_t signs = 0; signs < (std::uint64_t{1} << k); ++signs) {
            for (std::size_t i = 0; i < relators.size(); ++i) {
                image[i].resize(relators[i].size());
                for (std::size_t j = 0; j < relators[i].size(); ++j) {
                    const auto l = relators[i][j];
                    const auto g = static_cast<std::size_t>(l < 0 ? -l : l) - 1;
                    Letter to = perm[g];
                    if ((signs >> g) & 1) to = -to;
                    image[i][j] = l < 0 ? -to : to;
                }
            }
            sort_relators(image);
            if (!have || relators_less(image, best)) {
                best = image;
                have = true;
            }
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Cyclically reduced words of length `len` over `k` generators, shortlex order.
void words_of_length(std::size_t k, std::size_t len, std::vector<Word>& out) {
    std::vector<Letter> letters;
    for (std::size_t g = 1; g <= k; ++g) {
        letters.push_back(static_cast<Letter>(g));
        letters.push_back(-static_cast<Letter>(g));
    }
    Word w;
    auto rec = [&](auto&& self) -> void {
        if (w.size() == len) {
            if (is_cyclically_reduced(w)) out.push_back(w);
            return;
        }
        for (auto l : letters) {
            if (!w.empty() && w.back() == -l) continue;
            w.push_back(l);
            self(self);
            w.pop_back();
        }
    };
    rec(rec);
}

}  // namespace

FinitePresentation canonical_presentation(const FinitePresentation& p) {
    std::vector<Word> rs;
    for (const auto& r : p.relators()) rs.push_back(cyclic_reduce(r));
    return FinitePresentation(p.generators(), least_image(p.generators(), rs));
}

PresentationCensus enumerate_presentations(std::size_t max_length) {
    if (max_length > kCensusCap)
        throw CapExceeded("census length " + std::to_string(max_length) + " exceeds the cap of " +
                          std::to_string(kCensusCap));
    PresentationCensus census;
    census.max_length = max_length;
    for (std::size_t k = 1; k <= max_length; ++k) {
        const std::size_t budget = max_length - k;
        std::vector<Word> words;
        for (std::size_t len = 1; len <= budget; ++len) words_of_length(k, len, words);
        // Sorted multisets of words (non-decreasing indices) within budget;
        // keep those that are their own canonical form.
        std::vector<Word> chosen;
        auto rec = [&](auto&& self, std::size_t from, std::size_t left) -> void {
            if (least_image(k, chosen) == chosen) census.presentations.emplace_back(k, chosen);
            for (std::size_t i = from; i < words.size() && words[i].size() <= left; ++i) {
                chosen.push_back(words[i]);
                self(self, i, left - words[i].size());
                chosen.pop_back();
            }
        };
        rec(rec, 0, budget);
    }
    std::stable_sort(census.presentations.begin(), census.presentations.end(),
                     [](const FinitePresentation& a, const FinitePresentation& b) {
                         const auto la = presentation_length(a), lb = presentation_length(b);
                         if (la != lb) return la < lb;
                         if (a.generators() != b.generators()) return a.generators() < b.generators();
                         return relators_less(a.relators(), b.relators());
                     });
    return census;
}

}  // namespace hierarch::groups
