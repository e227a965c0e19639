#pragma once

// Two nearly touching convex inclusions D1 (above) and D2 (below) inside a
// disk/ball D. Near the closest points the inclusion boundaries are graphs
// x_n = eps + h1(x') and x_n = h2(x'); beyond |x'| = R0 each boundary is
// closed by a circular cap that meets the profile with a matching tangent.

#include "nclab/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace nclab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

enum class ProfileKind { Quadratic, PowerLaw };

struct Heights {
    double upper = 0.0; ///< h1(x')
    double lower = 0.0; ///< h2(x')
};

/// Model neck profile. Only the relative profile h1 - h2 enters the
/// asymptotics; the split fractions s1 + s2 = 1 apportion it between the two
/// surfaces.
class NeckProfile {
public:
    /// (h1 - h2)(x') = sum_j curvatures[j] / 2 * x_j^2
    static NeckProfile quadratic(std::vector<double> curvatures, double upper_share = 0.5) {
        require(!curvatures.empty() && curvatures.size() <= 2,
                "quadratic profile needs one or two principal curvatures");
        for (double c : curvatures) require(c > 0.0, "principal relative curvatures must be positive");
        NeckProfile p;
        p.kind_ = ProfileKind::Quadratic;
        p.curvatures_ = std::move(curvatures);
        p.set_share(upper_share);
        return p;
    }

    /// (h1 - h2)(x') = coefficient * |x'|^order
    static NeckProfile power_law(double order, double coefficient, double upper_share = 0.5) {
        require(order >= 2.0, "convexity order must satisfy m >= 2");
        require(coefficient > 0.0, "power-law coefficient must be positive");
        NeckProfile p;
        p.kind_ = ProfileKind::PowerLaw;
        p.order_ = order;
        p.coefficient_ = coefficient;
        p.set_share(upper_share);
        return p;
    }

    ProfileKind kind() const noexcept { return kind_; }
    const std::vector<double>& curvatures() const noexcept { return curvatures_; }
    double upper_share() const noexcept { return upper_share_; }
    double lower_share() const noexcept { return 1.0 - upper_share_; }

    /// m: 2 for quadratic profiles.
    double order() const noexcept { return kind_ == ProfileKind::Quadratic ? 2.0 : order_; }

    /// lambda with (h1 - h2) = lambda |x'|^m along every direction; requires radial symmetry.
    double coefficient() const {
        if (kind_ == ProfileKind::PowerLaw) return coefficient_;
        require(radially_symmetric(), "anisotropic quadratic profile has no single coefficient");
        return 0.5 * curvatures_.front();
    }

    bool radially_symmetric() const noexcept {
        return kind_ == ProfileKind::PowerLaw || curvatures_.size() == 1 ||
               curvatures_[0] == curvatures_[1];
    }

    /// Lower bound kappa1 on the Hessians of h1 and -h2 at the origin.
    double convexity_bound() const {
        if (kind_ != ProfileKind::Quadratic) return 0.0;
        double lmin = *std::min_element(curvatures_.begin(), curvatures_.end());
        return std::min(upper_share_, lower_share()) * lmin;
    }

    double relative(std::span<const double> xp) const {
        if (kind_ == ProfileKind::Quadratic) {
            check_dim(xp);
            double s = 0.0;
            for (std::size_t j = 0; j < xp.size(); ++j) s += 0.5 * curvatures_[j] * xp[j] * xp[j];
            return s;
        }
        return coefficient_ * std::pow(radius_of(xp), order_);
    }

    Heights heights(std::span<const double> xp) const {
        double rel = relative(xp);
        return {upper_share_ * rel, -lower_share() * rel};
    }

    /// Gradient of h1 - h2 with respect to x'.
    std::vector<double> relative_gradient(std::span<const double> xp) const {
        std::vector<double> g(xp.size(), 0.0);
        if (kind_ == ProfileKind::Quadratic) {
            check_dim(xp);
            for (std::size_t j = 0; j < xp.size(); ++j) g[j] = curvatures_[j] * xp[j];
            return g;
        }
        double r = radius_of(xp);
        if (r == 0.0) return g;
        double dr = coefficient_ * order_ * std::pow(r, order_ - 1.0);
        for (std::size_t j = 0; j < xp.size(); ++j) g[j] = dr * xp[j] / r;
        return g;
    }

    /// Radial restriction (h1 - h2)(r) for radially symmetric profiles.
    double relative_radial(double r) const { return coefficient() * std::pow(std::abs(r), order()); }
    double relative_radial_slope(double r) const {
        return coefficient() * order() * std::pow(std::abs(r), order() - 1.0);
    }

    int required_dim() const noexcept {
        return kind_ == ProfileKind::Quadratic ? static_cast<int>(curvatures_.size()) : 0;
    }

private:
    NeckProfile() = default;

    void set_share(double s) {
        require(s >= 0.0 && s <= 1.0, "split fraction must lie in [0, 1]");
        upper_share_ = s;
    }

    void check_dim(std::span<const double> xp) const {
        require(xp.size() == curvatures_.size(),
                "tangential coordinate has " + std::to_string(xp.size()) +
                    " components, profile expects " + std::to_string(curvatures_.size()));
    }

    static double radius_of(std::span<const double> xp) {
        double s = 0.0;
        for (double v : xp) s += v * v;
        return std::sqrt(s);
    }

    ProfileKind kind_ = ProfileKind::Quadratic;
    std::vector<double> curvatures_;
    double order_ = 2.0;
    double coefficient_ = 1.0;
    double upper_share_ = 0.5;
};

enum class Region { InD1, InD2, InNeck, InFar, Outside };

inline const char* to_string(Region r) {
    switch (r) {
    case Region::InD1: return "InD1";
    case Region::InD2: return "InD2";
    case Region::InNeck: return "InNeck";
    case Region::InFar: return "InFar";
    case Region::Outside: return "Outside";
    }
    return "?";
}

/// Circular cap closing an inclusion beyond |x'| = R0. The circle is centred
/// on the x_n axis and passes through the junction point with the profile's
/// tangent there.
struct Cap {
    double junction_height = 0.0; ///< x_n of the profile at |x'| = R0
    double center_height = 0.0;
    double radius = 0.0;
};

class InclusionPair {
public:
    /// outer_shift places the centre of D at (0', outer_shift * eps); 0 keeps D
    /// fixed while D1 translates, 1/2 makes the configuration mirror-symmetric.
    InclusionPair(int dimension, NeckProfile profile, double epsilon, double neck_radius = 0.5,
                  double outer_radius = 4.0, double outer_shift = 0.0)
        : dim_(dimension), profile_(std::move(profile)), eps_(epsilon), r0_(neck_radius),
          rd_(outer_radius), outer_shift_(outer_shift) {
        require(dim_ == 2 || dim_ == 3, "dimension must be 2 or 3");
        require(eps_ >= 0.0 && std::isfinite(eps_), "gap must be nonnegative");
        require(r0_ > 0.0 && r0_ < 1.0, "neck radius R0 must lie in (0, 1)");
        int need = profile_.required_dim();
        require(need == 0 || need == dim_ - 1,
                "quadratic profile needs n-1 principal curvatures");
        if (profile_.kind() == ProfileKind::PowerLaw && dim_ == 3)
            require(profile_.order() >= 2.0, "order m must satisfy m >= n-1 for n = 3");
        if (profile_.radially_symmetric()) build_caps();
    }

    int dimension() const noexcept { return dim_; }
    const NeckProfile& profile() const noexcept { return profile_; }
    double epsilon() const noexcept { return eps_; }
    double neck_radius() const noexcept { return r0_; }
    double outer_radius() const noexcept { return rd_; }
    double outer_shift() const noexcept { return outer_shift_; }
    double outer_center_height() const noexcept { return outer_shift_ * eps_; }
    bool has_caps() const noexcept { return caps_; }

    InclusionPair with_epsilon(double eps) const {
        return InclusionPair(dim_, profile_, eps, r0_, rd_, outer_shift_);
    }

    const Cap& upper_cap() const { require(caps_, "caps need a radially symmetric profile"); return upper_; }
    const Cap& lower_cap() const { require(caps_, "caps need a radially symmetric profile"); return lower_; }

    /// Mirror symmetry about x_n = eps/2 (equal split, D centred on the midplane).
    bool mirror_symmetric() const noexcept {
        return profile_.upper_share() == 0.5 && outer_shift_ == 0.5;
    }

    Heights heights(std::span<const double> xp) const {
        check_tangential(xp);
        return profile_.heights(xp);
    }

    /// delta(x') = eps + (h1 - h2)(x')
    double gap(std::span<const double> xp) const {
        check_tangential(xp);
        return eps_ + profile_.relative(xp);
    }

    double gap(double x1) const { return gap(std::span<const double>(&x1, 1)); }
    Heights heights(double x1) const { return heights(std::span<const double>(&x1, 1)); }

    /// Region containing x (n components). InNeck means x lies in Omega_r.
    Region classify(std::span<const double> x, double neck_r) const {
        require(static_cast<int>(x.size()) == dim_, "point dimension mismatch");
        require(caps_, "classification needs a radially symmetric profile");
        std::span<const double> xp = x.first(dim_ - 1);
        double xn = x[dim_ - 1];
        double r = 0.0;
        for (double v : xp) r += v * v;
        r = std::sqrt(r);

        double oc = outer_center_height();
        if (r * r + (xn - oc) * (xn - oc) > rd_ * rd_) return Region::Outside;
        if (in_upper(r, xn)) return Region::InD1;
        if (in_lower(r, xn)) return Region::InD2;
        if (r < neck_r && r < 2.0 * r0_) {
            Heights h = profile_.heights(xp);
            if (xn > h.lower && xn < eps_ + h.upper) return Region::InNeck;
        }
        return Region::InFar;
    }

    Region classify(Vec2 p, double neck_r) const {
        std::array<double, 2> x{p.x, p.y};
        return classify(std::span<const double>(x), neck_r);
    }
    Region classify(Vec2 p) const { return classify(p, r0_); }

    /// Closest points P1 = (0', eps) and P2 = (0', 0).
    std::vector<double> p1() const { std::vector<double> v(dim_, 0.0); v.back() = eps_; return v; }
    std::vector<double> p2() const { return std::vector<double>(dim_, 0.0); }

    /// Distance from D1 u D2 to the outer boundary.
    double clearance() const {
        double oc = outer_center_height();
        double far1 = std::abs(upper_.center_height - oc) + upper_.radius;
        double far2 = std::abs(lower_.center_height - oc) + lower_.radius;
        return rd_ - std::max(far1, far2);
    }

    static constexpr double kSeparation = 1.0; ///< kappa0

private:
    void check_tangential(std::span<const double> xp) const {
        require(static_cast<int>(xp.size()) == dim_ - 1, "tangential coordinate dimension mismatch");
        double r = 0.0;
        for (double v : xp) r += v * v;
        require(std::sqrt(r) <= 2.0 * r0_ * (1.0 + 1e-12), "|x'| exceeds 2 R0");
    }

    void build_caps() {
        double su = profile_.upper_share();
        double sl = profile_.lower_share();
        require(su > 0.0 && sl > 0.0, "closed inclusions need split fractions in (0, 1)");
        double rel = profile_.relative_radial(r0_);
        double slope = profile_.relative_radial_slope(r0_);

        upper_.junction_height = eps_ + su * rel;
        upper_.center_height = upper_.junction_height + r0_ / (su * slope);
        upper_.radius = std::hypot(r0_, r0_ / (su * slope));

        lower_.junction_height = -sl * rel;
        lower_.center_height = lower_.junction_height - r0_ / (sl * slope);
        lower_.radius = std::hypot(r0_, r0_ / (sl * slope));
        caps_ = true;

        require(clearance() > kSeparation,
                "inclusions too close to the outer boundary (clearance " +
                    std::to_string(clearance()) + ")");
    }

    bool in_upper(double r, double xn) const {
        if (xn >= upper_.junction_height) {
            double dz = xn - upper_.center_height;
            return r * r + dz * dz <= upper_.radius * upper_.radius;
        }
        return r <= r0_ && xn >= eps_ + profile_.upper_share() * profile_.relative_radial(r);
    }

    bool in_lower(double r, double xn) const {
        if (xn <= lower_.junction_height) {
            double dz = xn - lower_.center_height;
            return r * r + dz * dz <= lower_.radius * lower_.radius;
        }
        return r <= r0_ && xn <= -profile_.lower_share() * profile_.relative_radial(r);
    }

    int dim_;
    NeckProfile profile_;
    double eps_;
    double r0_;
    double rd_;
    double outer_shift_;
    bool caps_ = false;
    Cap upper_;
    Cap lower_;
};

} // namespace nclab
