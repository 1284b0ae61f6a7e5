#include "helmdd/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace helmdd {

namespace {

constexpr double kSnapTol = 1e-9;

struct AxisSplit {
    std::vector<int> cuts, lo, hi;
};

AxisSplit split_axis(int n_int, int parts, int layers, const char* axis) {
    if (parts < 1) throw Error("build_layout: subdomain counts must be positive");
    if (n_int < parts) {
        std::ostringstream os;
        os << "build_layout: " << n_int << " elements along " << axis << " cannot host " << parts << " subdomains";
        throw Error(os.str());
    }
    AxisSplit s;
    s.cuts.resize(parts + 1);
    for (int i = 0; i <= parts; ++i) s.cuts[i] = (2 * i * n_int + parts) / (2 * parts);
    s.lo.assign(parts, 0);
    s.hi.assign(parts, n_int);
    for (int i = 1; i < parts; ++i) {
        s.hi[i - 1] = s.cuts[i] + (layers + 1) / 2;
        s.lo[i] = s.cuts[i] - layers / 2;
    }
    for (int i = 0; i < parts; ++i) {
        if (s.lo[i] < 0 || s.hi[i] > n_int || s.lo[i] >= s.hi[i])
            throw Error(std::string("build_layout: overlap does not fit along ") + axis);
        if (i + 2 < parts && s.hi[i] > s.lo[i + 2]) {
            std::ostringstream os;
            os << "build_layout: overlap of " << layers << " layers along " << axis
               << " makes non-neighbouring subdomains " << i << " and " << i + 2 << " overlap";
            throw Error(os.str());
        }
    }
    return s;
}

int overlap_layers(double delta, double h, int parts, const char* axis) {
    if (parts == 1) return 0;
    if (delta < h * (1.0 - kSnapTol)) {
        std::ostringstream os;
        os << "build_layout: overlap " << delta << " is below the mesh size " << h << " along " << axis;
        throw Error(os.str());
    }
    return static_cast<int>(std::ceil(delta / h * (1.0 - kSnapTol)));
}

}  // namespace

std::string OverlapRule::describe() const {
    std::ostringstream os;
    if (kind == Kind::Layers)
        os << value << "h";
    else
        os << value;
    return os.str();
}

SubdomainLayout build_layout(const Grid& grid, int n1, int n2, const OverlapRule& rule, double kappa_interior) {
    if (!(kappa_interior > 0.0)) throw Error("build_layout: kappa must be positive");
    const ElementBlock inner = grid.interior_elements();
    const double delta = rule.resolve(grid.h());
    SubdomainLayout out;
    out.n1 = n1;
    out.n2 = n2;
    out.delta = delta;
    out.overlap_layers_x = overlap_layers(delta, grid.hx(), n1, "x");
    out.overlap_layers_y = overlap_layers(delta, grid.hy(), n2, "y");
    const AxisSplit sx = split_axis(inner.nx(), n1, out.overlap_layers_x, "x");
    const AxisSplit sy = split_axis(inner.ny(), n2, out.overlap_layers_y, "y");
    out.cuts_x = sx.cuts;
    out.cuts_y = sy.cuts;
    out.lo_x = sx.lo;
    out.hi_x = sx.hi;
    out.lo_y = sy.lo;
    out.hi_y = sy.hi;
    const int kx = static_cast<int>(std::ceil(kappa_interior / grid.hx() * (1.0 - kSnapTol)));
    const int ky = static_cast<int>(std::ceil(kappa_interior / grid.hy() * (1.0 - kSnapTol)));
    out.kappa_interior = std::max(kx * grid.hx(), ky * grid.hy());

    out.subdomains.reserve(static_cast<std::size_t>(n1) * n2);
    for (int iy = 0; iy < n2; ++iy) {
        for (int ix = 0; ix < n1; ++ix) {
            Subdomain sd;
            sd.ix = ix;
            sd.iy = iy;
            sd.interior = {inner.ex0 + sx.lo[ix], inner.ex0 + sx.hi[ix], inner.ey0 + sy.lo[iy], inner.ey0 + sy.hi[iy]};
            // External sides reach the boundary of Omega, so their collar is the global PML.
            sd.extended.ex0 = ix == 0 ? 0 : std::max(0, sd.interior.ex0 - kx);
            sd.extended.ex1 = ix == n1 - 1 ? grid.nx() : std::min(grid.nx(), sd.interior.ex1 + kx);
            sd.extended.ey0 = iy == 0 ? 0 : std::max(0, sd.interior.ey0 - ky);
            sd.extended.ey1 = iy == n2 - 1 ? grid.ny() : std::min(grid.ny(), sd.interior.ey1 + ky);
            sd.interior_box = grid.block_rect(sd.interior);
            sd.extended_box = grid.block_rect(sd.extended);
            sd.dofs = block_free_dofs(grid, sd.extended);
            out.subdomains.push_back(std::move(sd));
        }
    }
    return out;
}

std::string layout_report(const Grid& grid, const SubdomainLayout& layout) {
    using nlohmann::json;
    auto rect = [](const Rect& r) { return json::array({r.x_lo, r.x_hi, r.y_lo, r.y_hi}); };
    json j;
    j["N1"] = layout.n1;
    j["N2"] = layout.n2;
    j["delta"] = layout.delta;
    j["overlap_layers"] = {layout.overlap_layers_x, layout.overlap_layers_y};
    j["kappa_interior"] = layout.kappa_interior;
    j["h"] = grid.h();
    j["global_dofs"] = grid.num_free();
    j["subdomains"] = json::array();
    for (int s = 0; s < layout.size(); ++s) {
        const Subdomain& sd = layout.subdomains[s];
        j["subdomains"].push_back({{"index", s},
                                   {"position", {sd.ix, sd.iy}},
                                   {"interior_box", rect(sd.interior_box)},
                                   {"extended_box", rect(sd.extended_box)},
                                   {"dofs", sd.dofs.size()}});
    }
    return j.dump(2);
}

double trapezoid_profile(const std::vector<int>& lo, const std::vector<int>& hi, int i, double t) {
    const int n = static_cast<int>(lo.size());
    double left = 1.0;
    double right = 1.0;
    if (i > 0) left = std::clamp((t - lo[i]) / (hi[i - 1] - lo[i]), 0.0, 1.0);
    if (i < n - 1) right = std::clamp((hi[i] - t) / (hi[i] - lo[i + 1]), 0.0, 1.0);
    return left * right;
}

PartitionOfUnity build_pou(const Grid& grid, const SubdomainLayout& layout) {
    const int p = grid.order();
    const int px = grid.pml_elements_x();
    const int py = grid.pml_elements_y();
    // 1D profiles sum to one up to rounding, so the 2D normaliser is the product of 1D sums.
    std::vector<double> sum_x(grid.nodes_x(), 0.0), sum_y(grid.nodes_y(), 0.0);
    auto tx = [&](int ix) { return static_cast<double>(ix) / p - px; };
    auto ty = [&](int iy) { return static_cast<double>(iy) / p - py; };
    for (int ix = 0; ix < grid.nodes_x(); ++ix)
        for (int i = 0; i < layout.n1; ++i) sum_x[ix] += trapezoid_profile(layout.lo_x, layout.hi_x, i, tx(ix));
    for (int iy = 0; iy < grid.nodes_y(); ++iy)
        for (int i = 0; i < layout.n2; ++i) sum_y[iy] += trapezoid_profile(layout.lo_y, layout.hi_y, i, ty(iy));

    PartitionOfUnity pou;
    pou.order = p;
    for (const Subdomain& sd : layout.subdomains) {
        const ElementBlock& b = sd.extended;
        const int bx = b.nx() * p + 1;
        const int by = b.ny() * p + 1;
        std::vector<double> chi(static_cast<std::size_t>(bx) * by, 0.0);
        for (int jy = 0; jy < by; ++jy) {
            const int iy = b.ey0 * p + jy;
            const double fy = trapezoid_profile(layout.lo_y, layout.hi_y, sd.iy, ty(iy));
            if (fy == 0.0) continue;
            for (int jx = 0; jx < bx; ++jx) {
                const int ix = b.ex0 * p + jx;
                const double fx = trapezoid_profile(layout.lo_x, layout.hi_x, sd.ix, tx(ix));
                chi[jy * bx + jx] = (fx * fy) / (sum_x[ix] * sum_y[iy]);
            }
        }
        pou.chi.push_back(std::move(chi));
        pou.blocks.push_back(b);
    }
    return pou;
}

double PartitionOfUnity::value(const Grid& grid, int j, int node) const {
    const ElementBlock& b = blocks[j];
    const int ix = node % grid.nodes_x() - b.ex0 * order;
    const int iy = node / grid.nodes_x() - b.ey0 * order;
    const int bx = b.nx() * order + 1;
    const int by = b.ny() * order + 1;
    if (ix < 0 || iy < 0 || ix >= bx || iy >= by) return 0.0;
    return chi[j][iy * bx + ix];
}

std::vector<double> PartitionOfUnity::on_dofs(int j) const {
    const ElementBlock& b = blocks[j];
    const int bx = b.nx() * order + 1;
    const int by = b.ny() * order + 1;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(bx - 2) * (by - 2));
    for (int iy = 1; iy < by - 1; ++iy)
        for (int ix = 1; ix < bx - 1; ++ix) out.push_back(chi[j][iy * bx + ix]);
    return out;
}

TransferOps build_transfer(const Grid& grid, const SubdomainLayout& layout, const PartitionOfUnity& pou) {
    TransferOps ops;
    ops.global_size = grid.num_free();
    for (int j = 0; j < layout.size(); ++j) {
        ops.dofs.push_back(layout.subdomains[j].dofs);
        ops.weights.push_back(pou.on_dofs(j));
    }
    return ops;
}

CVector TransferOps::restrict_to(int j, std::span<const cplx> v) const {
    if (static_cast<int>(v.size()) != global_size) throw Error("restrict: dimension mismatch");
    const std::vector<int>& idx = dofs[j];
    CVector out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

void TransferOps::add_weighted(int j, std::span<const cplx> w, std::span<cplx> out) const {
    const std::vector<int>& idx = dofs[j];
    if (w.size() != idx.size() || static_cast<int>(out.size()) != global_size)
        throw Error("extend_weighted: dimension mismatch");
    const std::vector<double>& chi = weights[j];
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] += chi[i] * w[i];
}

CVector TransferOps::extend_weighted(int j, std::span<const cplx> w) const {
    CVector out(global_size, cplx{});
    add_weighted(j, w, out);
    return out;
}

CVector TransferOps::extend_zero(int j, std::span<const cplx> w) const {
    const std::vector<int>& idx = dofs[j];
    if (w.size() != idx.size()) throw Error("extend: dimension mismatch");
    CVector out(global_size, cplx{});
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = w[i];
    return out;
}

double pou_agreement_defect(const Grid& grid, const SubdomainLayout& layout, const PartitionOfUnity& pou,
                            const CoefficientField& global_field) {
    const int p = grid.order();
    double worst = 0.0;
    for (int j = 0; j < layout.size(); ++j) {
        const CoefficientField local = local_field(global_field, layout.subdomains[j].interior_box);
        const ElementBlock& b = layout.subdomains[j].extended;
        for (int iy = b.ey0 * p; iy <= b.ey1 * p; ++iy)
            for (int ix = b.ex0 * p; ix <= b.ex1 * p; ++ix) {
                const int node = grid.node_index(ix, iy);
                if (pou.value(grid, j, node) <= 0.0) continue;
                const Point x = grid.node(node);
                worst = std::max(worst, std::abs(gamma(local.axis_x, x.x) - gamma(global_field.axis_x, x.x)));
                worst = std::max(worst, std::abs(gamma(local.axis_y, x.y) - gamma(global_field.axis_y, x.y)));
            }
    }
    return worst;
}

}  // namespace helmdd
