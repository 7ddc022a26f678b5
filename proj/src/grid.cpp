#include "fhm/grid.hpp"

#include <cmath>
#include <string>

namespace fhm {

DomainSpec DomainSpec::disc(double r_outer)
{
    DomainSpec d{DomainKind::disc, std::nullopt, r_outer};
    d.validate();
    return d;
}

DomainSpec DomainSpec::annulus(double r_inner, double r_outer)
{
    DomainSpec d{DomainKind::annulus, r_inner, r_outer};
    d.validate();
    return d;
}

void DomainSpec::validate() const
{
    if (!(std::isfinite(r_outer) && r_outer > 0.0))
        throw InputError("domain: r_outer must be positive and finite");
    if (kind == DomainKind::disc) {
        if (r_inner)
            throw InputError("domain: disc takes no inner radius");
        return;
    }
    if (!r_inner)
        throw InputError("domain: annulus requires an inner radius");
    if (!(std::isfinite(*r_inner) && *r_inner > 0.0 && *r_inner < r_outer))
        throw InputError("domain: annulus requires 0 < r_inner < r_outer, got r_inner = " +
                         to_text(*r_inner) + ", r_outer = " + to_text(r_outer));
}

Grid::Grid(DomainSpec domain, int n_rad, int n_ang) : domain_(domain), n_rad_(n_rad), n_ang_(n_ang)
{
    domain_.validate();
    if (n_rad < 8)
        throw InputError("grid: n_rad must be at least 8, got " + std::to_string(n_rad));
    if (n_ang < 8 || n_ang % 2 != 0)
        throw InputError("grid: n_ang must be even and at least 8, got " + std::to_string(n_ang));
    if (domain_.kind == DomainKind::annulus)
        d_rad_ = (std::log(domain_.r_outer) - std::log(*domain_.r_inner)) / (n_rad - 1);
    else
        d_rad_ = domain_.r_outer / (n_rad - 0.5);
}

double Grid::radial(int i_rad) const noexcept
{
    if (kind() == DomainKind::annulus) {
        // Pin both ends exactly so boundary rings reproduce log r1 and log r2.
        if (i_rad == n_rad_ - 1)
            return std::log(domain_.r_outer);
        return std::log(*domain_.r_inner) + d_rad_ * i_rad;
    }
    if (i_rad == n_rad_ - 1)
        return domain_.r_outer;
    return (i_rad + 0.5) * d_rad_;
}

std::vector<std::pair<Circle, int>> Grid::boundary_rings() const
{
    if (kind() == DomainKind::annulus)
        return {{Circle::inner, 0}, {Circle::outer, n_rad_ - 1}};
    return {{Circle::outer, n_rad_ - 1}};
}

Grid build_grid(const DomainSpec& domain, int n_rad, int n_ang)
{
    return Grid(domain, n_rad, n_ang);
}

NodeCoordinates node_coordinates(const Grid& grid, std::size_t index)
{
    if (index >= grid.size())
        throw InputError("node index " + std::to_string(index) + " out of range");
    const double rad = grid.radial(grid.i_rad(index));
    const double th = grid.angle(grid.i_ang(index));
    if (grid.chart() == Chart::log_polar) {
        const cplx zeta(rad, th);
        return {zeta, std::exp(zeta)};
    }
    const cplx w = std::polar(rad, th);
    return {w, w};
}

std::vector<BoundaryNode> boundary_nodes(const Grid& grid)
{
    std::vector<BoundaryNode> out;
    for (auto [circle, ring] : grid.boundary_rings())
        for (int j = 0; j < grid.n_ang(); ++j)
            out.push_back({grid.index(ring, j), circle});
    return out;
}

}  // namespace fhm
