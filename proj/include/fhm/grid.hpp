#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "fhm/types.hpp"

namespace fhm {

enum class DomainKind { disc, annulus };

/// Disc {|w| < r_outer} or annulus {r_inner < |w| < r_outer}.
struct DomainSpec {
    DomainKind kind = DomainKind::annulus;
    std::optional<double> r_inner;
    double r_outer = 1.0;

    static DomainSpec disc(double r_outer);
    static DomainSpec annulus(double r_inner, double r_outer);

    /// Throws InputError when the radii are inconsistent with the kind.
    void validate() const;

    bool operator==(const DomainSpec&) const = default;
};

enum class Chart { log_polar, polar_half_offset };
enum class Circle { inner, outer };

struct NodeCoordinates {
    cplx zeta;  ///< working-chart coordinate
    cplx w;     ///< point of the domain in C
};

struct BoundaryNode {
    std::size_t index;
    Circle circle;
    bool operator==(const BoundaryNode&) const = default;
};

/// Structured tensor grid in the working chart.
///
/// Annulus: log-polar chart zeta = sigma + i theta, sigma on [log r1, log r2]
/// with both ends included, theta uniform and periodic.
/// Disc: polar grid with half-offset radii r_j = (j + 1/2) h and
/// h = r_outer / (n_rad - 1/2), so ring n_rad - 1 sits on |w| = r_outer and no
/// node sits at the origin. The chart is the identity, zeta = w.
///
/// Node index = i_rad * n_ang + i_ang.
class Grid {
public:
    Grid(DomainSpec domain, int n_rad, int n_ang);

    const DomainSpec& domain() const noexcept { return domain_; }
    DomainKind kind() const noexcept { return domain_.kind; }
    Chart chart() const noexcept
    {
        return kind() == DomainKind::annulus ? Chart::log_polar : Chart::polar_half_offset;
    }
    int n_rad() const noexcept { return n_rad_; }
    int n_ang() const noexcept { return n_ang_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_rad_) * n_ang_; }

    /// Radial spacing: d sigma (annulus) or d r (disc).
    double d_rad() const noexcept { return d_rad_; }
    double d_ang() const noexcept { return 2.0 * std::numbers::pi / n_ang_; }

    /// sigma_i (annulus) or r_i (disc).
    double radial(int i_rad) const noexcept;
    double angle(int i_ang) const noexcept { return d_ang() * i_ang; }
    /// Lower end of the radial coordinate range: log r1 (annulus) or r_0 (disc).
    double radial_min() const noexcept { return radial(0); }
    double radial_max() const noexcept { return radial(n_rad_ - 1); }

    std::size_t index(int i_rad, int i_ang) const noexcept
    {
        return static_cast<std::size_t>(i_rad) * n_ang_ + static_cast<std::size_t>(wrap_ang(i_ang));
    }
    int i_rad(std::size_t index) const noexcept { return static_cast<int>(index / n_ang_); }
    int i_ang(std::size_t index) const noexcept { return static_cast<int>(index % n_ang_); }
    int wrap_ang(int i_ang) const noexcept { return ((i_ang % n_ang_) + n_ang_) % n_ang_; }

    bool is_boundary_ring(int i_rad) const noexcept
    {
        return i_rad == n_rad_ - 1 || (kind() == DomainKind::annulus && i_rad == 0);
    }
    bool is_boundary(std::size_t index) const noexcept { return is_boundary_ring(i_rad(index)); }

    /// Boundary rings in circle order: annulus {inner, outer}, disc {outer}.
    std::vector<std::pair<Circle, int>> boundary_rings() const;

    bool operator==(const Grid& other) const noexcept
    {
        return domain_ == other.domain_ && n_rad_ == other.n_rad_ && n_ang_ == other.n_ang_;
    }

private:
    DomainSpec domain_;
    int n_rad_;
    int n_ang_;
    double d_rad_;
};

Grid build_grid(const DomainSpec& domain, int n_rad, int n_ang);

/// Chart and domain coordinates of a node. Throws InputError when out of range.
NodeCoordinates node_coordinates(const Grid& grid, std::size_t index);

/// Boundary nodes, n_ang per circle, inner circle first on the annulus.
std::vector<BoundaryNode> boundary_nodes(const Grid& grid);

}  // namespace fhm
