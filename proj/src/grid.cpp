#include "helmdd/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace helmdd {

namespace {

// Relative slack used when deciding whether a coordinate sits on an element boundary.
constexpr double kAlignTol = 1e-9;

int snap_index(double offset, double h, const char* what) {
    const double t = offset / h;
    const double r = std::round(t);
    if (std::abs(t - r) > kAlignTol * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "box not mesh-aligned: " << what << " offset " << offset << " is not a multiple of h=" << h;
        throw Error(os.str());
    }
    return static_cast<int>(r);
}

}  // namespace

void Rect::validate() const {
    if (!(x_lo < x_hi) || !(y_lo < y_hi)) throw Error("degenerate rectangle");
}

std::string to_string(RegionTag tag) {
    switch (tag) {
        case RegionTag::Interior: return "Interior";
        case RegionTag::PmlWest: return "PmlWest";
        case RegionTag::PmlEast: return "PmlEast";
        case RegionTag::PmlSouth: return "PmlSouth";
        case RegionTag::PmlNorth: return "PmlNorth";
        case RegionTag::PmlCorner: return "PmlCorner";
    }
    return "?";
}

double MeshRule::resolve(double k) const {
    if (kind == Kind::Target) {
        if (!(value > 0.0)) throw Error("mesh rule: h_target must be positive");
        return value;
    }
    if (!(k >= 1.0)) throw Error("mesh rule: pollution rule requires k >= 1");
    if (!(value > 0.0)) throw Error("mesh rule: pollution constant must be positive");
    return value * std::pow(k, -1.25);
}

Grid::Grid(Rect interior, int nx_interior, int ny_interior, int pml_x, int pml_y, int p)
    : interior_(interior),
      nx_(nx_interior + 2 * pml_x),
      ny_(ny_interior + 2 * pml_y),
      pml_x_(pml_x),
      pml_y_(pml_y),
      p_(p) {
    interior.validate();
    if (p < 1 || p > 2) throw Error("grid: polynomial order must be 1 or 2");
    if (nx_interior < 1 || ny_interior < 1 || pml_x < 0 || pml_y < 0) throw Error("grid: bad element counts");
    hx_ = interior.width() / nx_interior;
    hy_ = interior.height() / ny_interior;
    domain_ = {interior.x_lo - pml_x * hx_, interior.x_hi + pml_x * hx_, interior.y_lo - pml_y * hy_,
               interior.y_hi + pml_y * hy_};
}

double Grid::node_x(int ix) const {
    const int n_int = (nx_ - 2 * pml_x_) * p_;
    if (ix - pml_x_ * p_ == n_int) return interior_.x_hi;
    return interior_.x_lo + (static_cast<double>(ix - pml_x_ * p_) / n_int) * interior_.width();
}

double Grid::node_y(int iy) const {
    const int n_int = (ny_ - 2 * pml_y_) * p_;
    if (iy - pml_y_ * p_ == n_int) return interior_.y_hi;
    return interior_.y_lo + (static_cast<double>(iy - pml_y_ * p_) / n_int) * interior_.height();
}

Point Grid::node(int index) const {
    return {node_x(index % nodes_x()), node_y(index / nodes_x())};
}

int Grid::free_index(int ix, int iy) const {
    if (ix <= 0 || iy <= 0 || ix >= nodes_x() - 1 || iy >= nodes_y() - 1) return -1;
    return (iy - 1) * (nodes_x() - 2) + (ix - 1);
}

int Grid::free_to_node(int free) const {
    const int mx = nodes_x() - 2;
    return node_index(free % mx + 1, free / mx + 1);
}

std::vector<int> Grid::boundary_nodes() const {
    std::vector<int> out;
    for (int iy = 0; iy < nodes_y(); ++iy)
        for (int ix = 0; ix < nodes_x(); ++ix)
            if (free_index(ix, iy) < 0) out.push_back(node_index(ix, iy));
    return out;
}

int Grid::nearest_node(Point x) const {
    if (!domain_.contains_closed(x, kAlignTol * std::max(domain_.width(), domain_.height())))
        throw Error("nearest_node: point outside domain");
    const double dx = hx_ / p_;
    const double dy = hy_ / p_;
    const int ix = std::clamp(static_cast<int>(std::lround((x.x - domain_.x_lo) / dx)), 0, nodes_x() - 1);
    const int iy = std::clamp(static_cast<int>(std::lround((x.y - domain_.y_lo) / dy)), 0, nodes_y() - 1);
    return node_index(ix, iy);
}

Rect Grid::block_rect(const ElementBlock& b) const {
    return {node_x(b.ex0 * p_), node_x(b.ex1 * p_), node_y(b.ey0 * p_), node_y(b.ey1 * p_)};
}

Grid build_grid(const Rect& omega_int, double kappa, double k, const MeshRule& rule, int p, std::size_t max_dofs) {
    omega_int.validate();
    if (!(kappa > 0.0)) throw Error("build_grid: kappa must be positive");
    const double h_target = rule.resolve(k);
    auto count = [&](double len) {
        return static_cast<int>(std::ceil(len / h_target * (1.0 - kAlignTol)));
    };
    const int nx_int = std::max(1, count(omega_int.width()));
    const int ny_int = std::max(1, count(omega_int.height()));
    const double hx = omega_int.width() / nx_int;
    const double hy = omega_int.height() / ny_int;
    // Round kappa up so the absorbing layer is never thinner than requested.
    const int mx = static_cast<int>(std::ceil(kappa / hx * (1.0 - kAlignTol)));
    const int my = static_cast<int>(std::ceil(kappa / hy * (1.0 - kAlignTol)));
    if (nx_int + 2 * mx < 4 || ny_int + 2 * my < 4) throw Error("build_grid: fewer than 4 elements per axis");
    const std::size_t dofs = static_cast<std::size_t>((nx_int + 2 * mx) * p + 1) *
                             static_cast<std::size_t>((ny_int + 2 * my) * p + 1);
    if (dofs > max_dofs) {
        std::ostringstream os;
        os << "build_grid: " << dofs << " dofs exceeds the cap of " << max_dofs << " (raise --max-dofs)";
        throw Error(os.str());
    }
    return Grid(omega_int, nx_int, ny_int, mx, my, p);
}

RegionTag classify_point(const Grid& grid, Point x) {
    const Rect& om = grid.domain();
    const Rect& in = grid.interior();
    const double tol = kAlignTol * std::max(om.width(), om.height());
    if (!om.contains_closed(x, tol)) throw Error("classify_point: point outside Omega");
    const bool west = x.x < in.x_lo - tol;
    const bool east = x.x > in.x_hi + tol;
    const bool south = x.y < in.y_lo - tol;
    const bool north = x.y > in.y_hi + tol;
    const bool horiz = west || east;
    const bool vert = south || north;
    if (horiz && vert) return RegionTag::PmlCorner;
    if (west) return RegionTag::PmlWest;
    if (east) return RegionTag::PmlEast;
    if (south) return RegionTag::PmlSouth;
    if (north) return RegionTag::PmlNorth;
    return RegionTag::Interior;
}

ElementBlock element_block(const Grid& grid, const Rect& box) {
    box.validate();
    const Rect& om = grid.domain();
    ElementBlock b{snap_index(box.x_lo - om.x_lo, grid.hx(), "x_lo"), snap_index(box.x_hi - om.x_lo, grid.hx(), "x_hi"),
                   snap_index(box.y_lo - om.y_lo, grid.hy(), "y_lo"), snap_index(box.y_hi - om.y_lo, grid.hy(), "y_hi")};
    b.ex0 = std::max(b.ex0, 0);
    b.ey0 = std::max(b.ey0, 0);
    b.ex1 = std::min(b.ex1, grid.nx());
    b.ey1 = std::min(b.ey1, grid.ny());
    if (b.nx() <= 0 || b.ny() <= 0) throw Error("element_block: box does not intersect the mesh");
    return b;
}

std::vector<int> elements_in(const Grid& grid, const Rect& box) {
    const ElementBlock b = element_block(grid, box);
    std::vector<int> out;
    out.reserve(b.size());
    for (int ey = b.ey0; ey < b.ey1; ++ey)
        for (int ex = b.ex0; ex < b.ex1; ++ex) out.push_back(ey * grid.nx() + ex);
    return out;
}

std::vector<int> block_free_dofs(const Grid& grid, const ElementBlock& b) {
    const int p = grid.order();
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(std::max(0, b.nx() * p - 1)) * std::max(0, b.ny() * p - 1));
    for (int iy = b.ey0 * p + 1; iy < b.ey1 * p; ++iy)
        for (int ix = b.ex0 * p + 1; ix < b.ex1 * p; ++ix) out.push_back(grid.free_index(ix, iy));
    return out;
}

}  // namespace helmdd
