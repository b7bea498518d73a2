#include "hierarch/arith.hpp"

#include <algorithm>
#include <set>

#include "hierarch/errors.hpp"

namespace hierarch::arith {

namespace {

// Unwinds a kernel evaluation whose budget ran out.
struct BudgetSpent {};

std::string tuple_text(std::span<const Value> values) {
    std::string out = "(";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += values[i].str();
    }
    return out + ")";
}

}  // namespace

void EvalBudget::tick(std::uint64_t n) {
    used_ += n;
    if (used_ > limit_) throw BudgetSpent{};
}

bool Kernel::operator()(std::span<const Value> args) const {
    EvalBudget budget(step_budget);
    try {
        return eval(args, budget);
    } catch (const BudgetSpent&) {
        throw KernelTimeout(tuple_text(args));
    }
}

PrenexFormula::PrenexFormula(std::vector<Block> prefix, Kernel kernel, std::vector<std::string> free_vars)
    : prefix_(std::move(prefix)), kernel_(std::move(kernel)), free_vars_(std::move(free_vars)) {
    if (!kernel_.eval) throw ValidationError("formula needs a kernel evaluator");
    std::set<std::string> names;
    auto add = [&](const std::string& v) {
        if (v.empty()) throw ValidationError("variable names must be nonempty");
        if (!names.insert(v).second) throw ValidationError("duplicate variable '" + v + "'");
    };
    for (const auto& b : prefix_) add(b.var);
    for (const auto& v : free_vars_) add(v);
    if (kernel_.constant_beyond && kernel_.constant_beyond->size() != arity())
        throw ValidationError("constant_beyond must give one bound per kernel argument");
}

std::string HierarchyClass::to_string() const {
    return std::string(side == Side::Sigma ? "Sigma_" : "Pi_") + std::to_string(level);
}

HierarchyClass classify(const PrenexFormula& f) {
    const auto& p = f.prefix();
    if (p.empty()) throw NotQuantified("formula has no quantifier prefix");
    int level = 1;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i].quantifier != p[i - 1].quantifier) ++level;
    return {p.front().quantifier == Quantifier::Exists ? Side::Sigma : Side::Pi, level};
}

Value pair(const Value& n1, const Value& n2) {
    if (n1 < 1 || n2 < 1) throw DomainError("pair is defined on positive integers");
    if (n2 > (Value(1) << 26)) throw DomainError("pair: exponent " + n2.str() + " is too large to represent");
    const Value odd = 2 * n1 - 1;
    return odd << static_cast<unsigned>(n2 - 1);
}

std::pair<Value, Value> unpair(const Value& code) {
    if (code < 1) throw DomainError("unpair is defined on positive integers");
    const auto twos = boost::multiprecision::lsb(code);
    const Value odd = code >> twos;
    return {(odd + 1) / 2, Value(twos) + 1};
}

PrenexFormula merge_leading_exists(const PrenexFormula& f) {
    const auto& p = f.prefix();
    if (p.size() < 2 || p[0].quantifier != Quantifier::Exists || p[1].quantifier != Quantifier::Exists)
        throw ShapeError("merge needs a prefix starting with two existential blocks");

    std::set<std::string> taken;
    for (const auto& b : p) taken.insert(b.var);
    for (const auto& v : f.free_vars()) taken.insert(v);
    std::string merged = "<" + p[0].var + "," + p[1].var + ">";
    while (taken.count(merged)) merged += "'";

    std::vector<Block> prefix{{Quantifier::Exists, merged}};
    prefix.insert(prefix.end(), p.begin() + 2, p.end());

    Kernel inner = f.kernel();
    Kernel k;
    k.step_budget = inner.step_budget;
    k.eval = [inner](std::span<const Value> args, EvalBudget& budget) {
        // The merged variable ranges over positive codes only.
        if (args[0] < 1) return false;
        auto [a, b] = unpair(args[0]);
        std::vector<Value> expanded;
        expanded.reserve(args.size() + 1);
        expanded.push_back(std::move(a));
        expanded.push_back(std::move(b));
        expanded.insert(expanded.end(), args.begin() + 1, args.end());
        return inner.eval(expanded, budget);
    };
    return PrenexFormula(std::move(prefix), std::move(k), f.free_vars());
}

namespace {

class BoxEvaluator {
public:
    BoxEvaluator(const PrenexFormula& f, std::vector<std::uint64_t> bounds, std::vector<Value> point, Domain domain)
        : f_(f), bounds_(std::move(bounds)), point_(std::move(point)), first_(domain.first()) {}

    BoundedResult run() {
        BoundedResult r;
        r.value = eval(0, &r.witness);
        return r;
    }

private:
    bool eval(std::size_t depth, std::optional<Value>* witness) {
        const auto& prefix = f_.prefix();
        if (depth == prefix.size()) return kernel();
        const bool exists = prefix[depth].quantifier == Quantifier::Exists;
        for (std::uint64_t v = first_; v <= bounds_[depth]; ++v) {
            point_[depth] = v;
            const bool sub = eval(depth + 1, nullptr);
            if (sub == exists) {
                if (witness) *witness = Value(v);
                return exists;
            }
        }
        return !exists;
    }

    bool kernel() {
        try {
            return f_.kernel()(point_);
        } catch (const KernelTimeout&) {
            std::vector<std::string> names;
            for (const auto& b : f_.prefix()) names.push_back(b.var);
            for (const auto& v : f_.free_vars()) names.push_back(v);
            throw KernelTimeout(format_point(names, point_));
        }
    }

    const PrenexFormula& f_;
    std::vector<std::uint64_t> bounds_;
    std::vector<Value> point_;
    std::uint64_t first_;
};

}  // namespace

BoundedResult bounded_eval(const PrenexFormula& f, const std::map<std::string, std::uint64_t>& bounds,
                           const std::map<std::string, Value>& free, Domain domain) {
    std::vector<std::uint64_t> box;
    for (const auto& b : f.prefix()) {
        auto it = bounds.find(b.var);
        if (it == bounds.end()) throw DomainError("no bound given for variable '" + b.var + "'");
        if (it->second < 1) throw DomainError("bound for '" + b.var + "' must be at least 1");
        box.push_back(it->second);
    }
    std::vector<Value> point(f.arity());
    for (std::size_t i = 0; i < f.free_vars().size(); ++i) {
        const auto& name = f.free_vars()[i];
        auto it = free.find(name);
        if (it == free.end()) throw DomainError("no value given for free variable '" + name + "'");
        point[f.prefix().size() + i] = it->second;
    }
    return BoxEvaluator(f, std::move(box), std::move(point), domain).run();
}

LimitResult limit_eval(const std::function<int(const Value&, std::uint64_t)>& g, const Value& n,
                       std::uint64_t stages) {
    if (stages < 1) throw DomainError("limit_eval needs at least one stage");
    LimitResult r;
    int previous = -1;
    for (std::uint64_t s = 1; s <= stages; ++s) {
        const int bit = g(n, s);
        if (bit != 0 && bit != 1)
            throw DomainError("limit evaluator returned " + std::to_string(bit) + " at stage " + std::to_string(s));
        r.stabilized_for = bit == previous ? r.stabilized_for + 1 : 1;
        previous = bit;
    }
    r.bit = previous;
    return r;
}

// --- Table kernels ------------------------------------------------------------

TableKernel::TableKernel(std::vector<std::string> vars, std::vector<std::uint64_t> bounds, bool default_value,
                         std::vector<std::vector<std::uint64_t>> support, std::uint64_t origin,
                         std::optional<std::uint64_t> seed)
    : vars_(std::move(vars)), bounds_(std::move(bounds)), origin_(origin), default_(default_value),
      support_(std::move(support)), seed_(seed) {
    if (vars_.empty()) throw ValidationError("table kernel needs at least one variable");
    if (bounds_.size() != vars_.size()) throw ValidationError("table kernel needs one bound per variable");
    if (origin_ > 1) throw ValidationError("table origin must be 0 or 1");
    std::size_t cells = 1;
    for (auto b : bounds_) {
        if (b < origin_) throw ValidationError("table bound below origin");
        if (b - origin_ + 1 > 4096) throw ValidationError("table bound too large");
        cells *= static_cast<std::size_t>(b - origin_ + 1);
        if (cells > (1u << 24)) throw ValidationError("table kernel too large");
    }
    cells_.assign(cells, default_ ? 1 : 0);
    for (const auto& p : support_) {
        if (p.size() != vars_.size()) throw ValidationError("support point has the wrong arity");
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p[i] < origin_ || p[i] > bounds_[i]) throw ValidationError("support point outside the table");
        cells_[offset(p)] = default_ ? 0 : 1;
    }
}

std::size_t TableKernel::offset(std::span<const std::uint64_t> point) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
        const auto v = std::clamp(point[i], origin_, bounds_[i]);
        off = off * static_cast<std::size_t>(bounds_[i] - origin_ + 1) + static_cast<std::size_t>(v - origin_);
    }
    return off;
}

bool TableKernel::at(std::span<const std::uint64_t> point) const {
    if (point.size() != vars_.size()) throw DomainError("table kernel called with the wrong arity");
    return cells_[offset(point)] != 0;
}

Kernel TableKernel::as_kernel() const {
    Kernel k;
    k.step_budget = 1;
    k.constant_beyond = bounds_;
    auto self = std::make_shared<const TableKernel>(*this);
    k.eval = [self](std::span<const Value> args, EvalBudget& budget) {
        budget.tick();
        std::vector<std::uint64_t> p(args.size());
        for (std::size_t i = 0; i < args.size(); ++i) {
            // Anything past the last bound reads the boundary cell.
            const auto& a = args[i];
            p[i] = a > self->bounds_[i] ? self->bounds_[i] : a < 0 ? 0 : static_cast<std::uint64_t>(a);
        }
        return self->at(p);
    };
    return k;
}

TableKernel TableKernel::threshold(std::uint64_t threshold, std::uint64_t origin) {
    if (threshold < origin) threshold = origin;
    const bool everywhere = threshold == origin;
    // Table n in origin..threshold; only the last row is true.
    return TableKernel({"n", "m", "k"}, {threshold, 1, 1}, everywhere, everywhere ? std::vector<std::vector<std::uint64_t>>{}
                                                                                     : std::vector<std::vector<std::uint64_t>>{{threshold, 1, 1}},
                       origin);
}

TableKernel TableKernel::from_json(const nlohmann::json& j) {
    try {
        if (j.contains("kind") && j.at("kind") != "table-kernel")
            throw ValidationError("expected kind 'table-kernel'");
        std::optional<std::uint64_t> seed;
        if (j.contains("seed") && !j.at("seed").is_null()) seed = j.at("seed").get<std::uint64_t>();
        return TableKernel(j.at("vars").get<std::vector<std::string>>(), j.at("bounds").get<std::vector<std::uint64_t>>(),
                           j.at("default").get<bool>(),
                           j.value("support", std::vector<std::vector<std::uint64_t>>{}), j.value("origin", std::uint64_t{1}),
                           seed);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed table kernel: ") + e.what());
    }
}

nlohmann::json TableKernel::to_json() const {
    nlohmann::json j;
    j["kind"] = "table-kernel";
    j["vars"] = vars_;
    j["origin"] = origin_;
    j["bounds"] = bounds_;
    j["default"] = default_;
    j["support"] = support_;
    if (seed_) j["seed"] = *seed_;
    return j;
}

PrenexFormula formula_from_json(const nlohmann::json& j) {
    try {
        std::vector<Block> prefix;
        for (const auto& item : j.at("prefix")) {
            const auto q = item.at(0).get<std::string>();
            if (q != "E" && q != "A") throw ValidationError("quantifier must be \"E\" or \"A\"");
            prefix.push_back({q == "E" ? Quantifier::Exists : Quantifier::ForAll, item.at(1).get<std::string>()});
        }
        auto free = j.value("free", std::vector<std::string>{});
        auto table = TableKernel::from_json(j.at("kernel"));
        if (table.vars().size() != prefix.size() + free.size())
            throw ValidationError("kernel arity does not match prefix plus free variables");
        return PrenexFormula(std::move(prefix), table.as_kernel(), std::move(free));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed formula: ") + e.what());
    }
}

std::string format_point(std::span<const std::string> names, std::span<const Value> values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += (i < names.size() ? names[i] : "x" + std::to_string(i + 1)) + "=" + values[i].str();
    }
    return out;
}

}  // namespace hierarch::arith
