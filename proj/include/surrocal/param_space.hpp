#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_set>
#include <vector>

#include "surrocal/common.hpp"
#include "surrocal/io.hpp"
#include "surrocal/prng.hpp"
#include "surrocal/sobol.hpp"

namespace surrocal {

struct Dimension {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
};

struct FixedParam {
    std::string name;
    double value = 0.0;
};

// Box of explored parameters plus the pinned ones. Dimension order is stable
// and defines vector component order everywhere (pools, CSVs, tree features).
struct ParameterSpace {
    std::vector<Dimension> dims;
    std::vector<FixedParam> fixed;

    int dimension() const { return static_cast<int>(dims.size()); }

    void validate() const {
        std::unordered_set<std::string> seen;
        for (const auto& d : dims) {
            require(d.lower < d.upper, "parameter space: dim '" + d.name + "' needs lower < upper");
            require(seen.insert(d.name).second, "parameter space: duplicate dim '" + d.name + "'");
        }
        for (const auto& f : fixed)
            require(seen.insert(f.name).second,
                    "parameter space: fixed '" + f.name + "' clashes with an explored dim");
    }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (dims[i].name == name) return static_cast<int>(i);
        return -1;
    }

    double fixed_value(const std::string& name, double fallback) const {
        for (const auto& f : fixed)
            if (f.name == name) return f.value;
        return fallback;
    }

    bool contains(const std::vector<double>& v) const {
        if (v.size() != dims.size()) return false;
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (!(v[i] >= dims[i].lower && v[i] <= dims[i].upper)) return false;
        return true;
    }
};

// Row-major matrix of parameter vectors; the working currency of the toolkit.
struct Pool {
    std::vector<double> data;
    int dim = 0;

    std::size_t size() const { return dim == 0 ? 0 : data.size() / static_cast<std::size_t>(dim); }
    const double* row(std::size_t i) const { return &data[i * static_cast<std::size_t>(dim)]; }
    double* row(std::size_t i) { return &data[i * static_cast<std::size_t>(dim)]; }

    std::vector<double> vec(std::size_t i) const {
        return std::vector<double>(row(i), row(i) + dim);
    }
};

enum class SampleScheme { sobol, uniform };

inline SampleScheme parse_scheme(const std::string& s) {
    if (s == "sobol") return SampleScheme::sobol;
    if (s == "uniform") return SampleScheme::uniform;
    fail("unknown sampling scheme '" + s + "' (expected sobol|uniform)");
}

// component-wise affine map from the unit cube into the box
inline void scale_to_space(const double* unit, const ParameterSpace& space, double* out) {
    for (int d = 0; d < space.dimension(); ++d) {
        const auto& dim = space.dims[static_cast<std::size_t>(d)];
        out[d] = dim.lower + unit[d] * (dim.upper - dim.lower);
    }
}

inline Pool scale_to_space(const std::vector<double>& unit_points, const ParameterSpace& space) {
    const int d = space.dimension();
    require(d > 0, "parameter space has no explored dims");
    require(unit_points.size() % static_cast<std::size_t>(d) == 0,
            "unit point array does not match space dimension");
    Pool pool;
    pool.dim = d;
    pool.data.resize(unit_points.size());
    const std::size_t n = unit_points.size() / static_cast<std::size_t>(d);
    for (std::size_t i = 0; i < n; ++i)
        scale_to_space(&unit_points[i * static_cast<std::size_t>(d)], space, &pool.data[i * static_cast<std::size_t>(d)]);
    return pool;
}

// Candidate pool inside the box; deterministic in (scheme, seed, size).
// Sobol pools start at index 1+seed: the all-zeros element sits on the box
// boundary, which is degenerate for several criteria.
inline Pool draw_pool(const ParameterSpace& space, std::size_t size, SampleScheme scheme, std::uint64_t seed) {
    require(size >= 1, "pool size must be >= 1");
    space.validate();
    const int d = space.dimension();
    Pool pool;
    pool.dim = d;
    pool.data.resize(size * static_cast<std::size_t>(d));
    if (scheme == SampleScheme::sobol) {
        SobolSequence seq(d);
        // the seed picks a bounded start offset; the 32-bit index space must
        // still hold offset + size
        seq.reset(1 + (seed & 0xFFFFFFull));
        std::vector<double> u(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < size; ++i) {
            seq.next(u.data());
            scale_to_space(u.data(), space, pool.row(i));
        }
    } else {
        Rng rng(mix_seed(0x706F6F6Cull, seed));
        std::unordered_set<std::uint64_t> fingerprints;
        fingerprints.reserve(size * 2);
        std::vector<double> u(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < size;) {
            std::uint64_t fp = 0xcbf29ce484222325ull;
            for (int k = 0; k < d; ++k) {
                u[static_cast<std::size_t>(k)] = rng.uniform();
                std::uint64_t bits;
                static_assert(sizeof(bits) == sizeof(double));
                std::memcpy(&bits, &u[static_cast<std::size_t>(k)], sizeof(bits));
                fp = splitmix64(fp ^ bits);
            }
            if (!fingerprints.insert(fp).second) continue; // redraw duplicates
            scale_to_space(u.data(), space, pool.row(i));
            ++i;
        }
    }
    return pool;
}

inline void write_pool_csv(const std::filesystem::path& path, const Pool& pool, const ParameterSpace& space) {
    CsvWriter w(path);
    std::vector<std::string> header{"index"};
    for (const auto& d : space.dims) header.push_back(d.name);
    w.row(header);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        std::vector<std::string> fields{fmt_int(static_cast<long long>(i))};
        for (int k = 0; k < pool.dim; ++k) fields.push_back(fmt_double(pool.row(i)[k]));
        w.row(fields);
    }
}

inline Pool read_pool_csv(const std::filesystem::path& path, const ParameterSpace& space) {
    const CsvTable t = read_csv(path);
    Pool pool;
    pool.dim = space.dimension();
    if (t.header.empty() && t.rows.empty()) return pool; // empty file -> empty pool
    require(!t.header.empty() && t.header[0] == "index",
            "pool CSV " + path.string() + ": first header column must be 'index'");
    require(static_cast<int>(t.header.size()) == pool.dim + 1,
            "pool CSV " + path.string() + ": expected " + std::to_string(pool.dim) + " dims");
    for (std::size_t k = 0; k < space.dims.size(); ++k)
        require(t.header[k + 1] == space.dims[k].name,
                "pool CSV " + path.string() + ": column '" + t.header[k + 1] +
                    "' does not match dim '" + space.dims[k].name + "'");
    pool.data.reserve(t.rows.size() * static_cast<std::size_t>(pool.dim));
    for (const auto& r : t.rows) {
        require(static_cast<int>(r.size()) == pool.dim + 1, "pool CSV row has wrong arity");
        for (int k = 0; k < pool.dim; ++k)
            pool.data.push_back(parse_double(r[static_cast<std::size_t>(k) + 1], "pool value"));
    }
    return pool;
}

} // namespace surrocal
