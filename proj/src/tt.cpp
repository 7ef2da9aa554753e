#include "ssgcn/tt.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/core.h>

#include "ssgcn/errors.hpp"
#include "ssgcn/graph.hpp"

namespace ssgcn {

Eigen::Index TtLayout::padded_in() const {
    Eigen::Index p = 1;
    for (auto f : in_factors) p *= f;
    return p;
}

Eigen::Index TtLayout::padded_out() const {
    Eigen::Index p = 1;
    for (auto f : out_factors) p *= f;
    return p;
}

Eigen::Index TtLayout::max_rank() const { return ranks.empty() ? 0 : *std::max_element(ranks.begin(), ranks.end()); }

std::int64_t TtLayout::param_count() const {
    std::int64_t total = 0;
    for (std::size_t k = 0; k < num_cores(); ++k) total += ranks[k] * in_factors[k] * out_factors[k] * ranks[k + 1];
    return total;
}

void TtLayout::validate() const {
    const auto d = num_cores();
    if (d < 2) throw std::invalid_argument("TT layout needs at least two cores");
    if (out_factors.size() != d || ranks.size() != d + 1)
        throw std::invalid_argument("TT layout factor/rank lengths disagree");
    if (ranks.front() != 1 || ranks.back() != 1) throw std::invalid_argument("TT boundary ranks must be 1");
    for (auto f : in_factors)
        if (f < 1) throw std::invalid_argument("TT factors must be positive");
    for (auto f : out_factors)
        if (f < 1) throw std::invalid_argument("TT factors must be positive");
    for (auto r : ranks)
        if (r < 1) throw std::invalid_argument("TT ranks must be positive");
    if (in_dim < 1 || out_dim < 1) throw std::invalid_argument("TT logical dimensions must be positive");
    if (padded_in() < in_dim || padded_out() < out_dim)
        throw std::invalid_argument("TT factor products smaller than logical dimensions");
}

namespace {

// Smallest t with t^d >= value.
Eigen::Index integer_root_ceil(Eigen::Index value, int d) {
    Eigen::Index t = 1;
    auto power = [d](Eigen::Index base) {
        Eigen::Index p = 1;
        for (int i = 0; i < d; ++i) p *= base;
        return p;
    };
    while (power(t) < value) ++t;
    return t;
}

// All non-decreasing tuples of `slots` factors in [lo, hi] whose product is value.
void factor_tuples(Eigen::Index value, int slots, Eigen::Index lo, Eigen::Index hi,
                   std::vector<Eigen::Index>& prefix, std::vector<std::vector<Eigen::Index>>& out) {
    if (slots == 1) {
        if (value >= lo && value <= hi) {
            prefix.push_back(value);
            out.push_back(prefix);
            prefix.pop_back();
        }
        return;
    }
    for (Eigen::Index f = lo; f <= hi && f * f <= value; ++f) {
        if (value % f != 0) continue;
        prefix.push_back(f);
        factor_tuples(value / f, slots - 1, f, hi, prefix, out);
        prefix.pop_back();
    }
}

} // namespace

std::vector<Eigen::Index> plan_dimension(Eigen::Index dim, int d) {
    if (dim < 1) throw std::invalid_argument("dimension must be at least 1");
    if (d < 2) throw std::invalid_argument("TT needs at least two cores");
    if (dim == 1) return std::vector<Eigen::Index>(static_cast<std::size_t>(d), 1);

    const Eigen::Index cap = std::min<Eigen::Index>(64, 2 * integer_root_ceil(dim, d));
    // Factors of 1 only when dim is too small for d factors of at least 2.
    for (Eigen::Index lo : {2, 1}) {
        for (Eigen::Index padded = dim; padded <= 2 * dim; ++padded) {
            std::vector<std::vector<Eigen::Index>> tuples;
            std::vector<Eigen::Index> prefix;
            factor_tuples(padded, d, lo, cap, prefix, tuples);
            if (tuples.empty()) continue;
            // Tuples are sorted ascending, so back() is the largest factor.
            return *std::min_element(tuples.begin(), tuples.end(), [](const auto& a, const auto& b) {
                if (a.back() != b.back()) return a.back() < b.back();
                return a < b;
            });
        }
    }
    throw std::invalid_argument(
        fmt::format("no balanced {}-factor product in [{}, {}] (factors in [2, {}])", d, dim, 2 * dim, cap));
}

TtLayout plan_factorization(Eigen::Index b, Eigen::Index c, int d, Eigen::Index r_max) {
    if (r_max < 1) throw std::invalid_argument("tt-rank must be at least 1");
    TtLayout layout;
    layout.in_dim = b;
    layout.out_dim = c;
    layout.in_factors = plan_dimension(b, d);
    layout.out_factors = plan_dimension(c, d);
    layout.ranks.assign(static_cast<std::size_t>(d) + 1, r_max);
    layout.ranks.front() = 1;
    layout.ranks.back() = 1;
    layout.validate();
    return layout;
}

double compression_ratio(const TtLayout& layout) {
    return static_cast<double>(layout.in_dim * layout.out_dim) / static_cast<double>(layout.param_count());
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

void write_list(std::ostream& out, const char* key, const std::vector<Eigen::Index>& values) {
    out << key << ' ' << values.size();
    for (auto v : values) out << ' ' << v;
    out << '\n';
}

std::vector<Eigen::Index> read_list(std::istream& in, const char* key) {
    std::string tag;
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != key) throw DataError(std::string("TT checkpoint: expected ") + key);
    std::vector<Eigen::Index> values(count);
    for (auto& v : values)
        if (!(in >> v)) throw DataError(std::string("TT checkpoint: truncated ") + key);
    return values;
}

} // namespace

void write_tt(const TtCores<double>& tt, std::ostream& out) {
    const auto& layout = tt.layout();
    out << "ssgcn-tt 1\n";
    out << "flatten row-major\n";
    out << "logical " << layout.in_dim << ' ' << layout.out_dim << '\n';
    write_list(out, "in_factors", layout.in_factors);
    write_list(out, "out_factors", layout.out_factors);
    write_list(out, "ranks", layout.ranks);
    for (std::size_t k = 0; k < tt.num_cores(); ++k) {
        const auto& core = tt.core(k);
        out << "core " << k << ' ' << core.size() << '\n';
        for (Eigen::Index i = 0; i < core.size(); ++i) out << (i ? " " : "") << format_double(core.data()[i]);
        out << '\n';
    }
}

TtCores<double> read_tt(std::istream& in) {
    std::string magic, tag, convention;
    int version = 0;
    if (!(in >> magic >> version) || magic != "ssgcn-tt" || version != 1)
        throw DataError("TT checkpoint: bad magic/version");
    if (!(in >> tag >> convention) || tag != "flatten" || convention != "row-major")
        throw DataError("TT checkpoint: unsupported flattening convention");
    TtLayout layout;
    if (!(in >> tag >> layout.in_dim >> layout.out_dim) || tag != "logical")
        throw DataError("TT checkpoint: expected logical dims");
    layout.in_factors = read_list(in, "in_factors");
    layout.out_factors = read_list(in, "out_factors");
    layout.ranks = read_list(in, "ranks");
    try {
        layout.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("TT checkpoint: ") + e.what());
    }
    TtCores<double> tt(layout);
    for (std::size_t k = 0; k < tt.num_cores(); ++k) {
        std::size_t index = 0;
        Eigen::Index count = 0;
        if (!(in >> tag >> index >> count) || tag != "core" || index != k || count != tt.core(k).size())
            throw DataError(fmt::format("TT checkpoint: bad header for core {}", k));
        for (Eigen::Index i = 0; i < count; ++i) {
            std::string token;
            if (!(in >> token)) throw DataError("TT checkpoint: truncated core data");
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
            if (ec != std::errc{} || ptr != token.data() + token.size())
                throw DataError("TT checkpoint: bad value `" + token + "`");
            tt.core(k).data()[i] = value;
        }
    }
    return tt;
}

} // namespace ssgcn
