#pragma once

#include "gjn/distribution.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gjn
{
    /// Substochastic routing matrix P = (p_kl); row k's deficit is the exit probability p_k0.
    class RoutingMatrix
    {
    public:
        RoutingMatrix() = default;
        explicit RoutingMatrix(Eigen::MatrixXd p) : p_(std::move(p)) {}
        static RoutingMatrix zero(int stations) { return RoutingMatrix(Eigen::MatrixXd::Zero(stations, stations)); }

        int size() const noexcept { return static_cast<int>(p_.rows()); }
        bool is_square() const noexcept { return p_.rows() == p_.cols(); }
        double operator()(int k, int l) const { return p_(k, l); }
        double &operator()(int k, int l) { return p_(k, l); }
        double exit_probability(int k) const { return 1.0 - p_.row(k).sum(); }
        const Eigen::MatrixXd &matrix() const noexcept { return p_; }

    private:
        Eigen::MatrixXd p_;
    };

    struct StationSpec
    {
        std::optional<DistributionSpec> arrival; // absent: no exogenous arrivals
        DistributionSpec service;
        std::int64_t initial_queue = 0;
    };

    struct NetworkSpec
    {
        std::vector<StationSpec> stations;
        RoutingMatrix routing;

        int size() const noexcept { return static_cast<int>(stations.size()); }
        Eigen::VectorXd arrival_rates() const;
        Eigen::VectorXd service_rates() const;
    };

    struct DriftReport
    {
        Eigen::VectorXd lambda;
        Eigen::VectorXd mu;
        Eigen::VectorXd effective_arrivals; // a = (I - Pᵀ)⁻¹ λ
        Eigen::VectorXd nu;                 // ν = (I - Pᵀ) μ - λ
        Eigen::MatrixXd routing;            // P, kept so bound computations need only the report
        double spectral_radius = 0.0;
        bool subcritical = false;  // μ > a
        bool strong_drift = false; // ν > 0

        /// Stations (0-based) with ν_k <= 0.
        std::vector<int> drift_violations() const;
        int size() const noexcept { return static_cast<int>(lambda.size()); }
    };

    /// ρ(P). Throws ValidationError on non-square P or entries outside [0,1].
    double spectral_radius(const RoutingMatrix &routing);

    /// Traffic equations and drift vector. Requires ρ(P) < 1.
    DriftReport solve_traffic(const NetworkSpec &spec);

    struct ValidationIssue
    {
        std::optional<int> station; // 0-based
        std::string reason;
    };

    struct ValidationResult
    {
        std::optional<DriftReport> report;
        std::vector<ValidationIssue> errors;
        std::vector<ValidationIssue> warnings;

        bool ok() const noexcept { return errors.empty(); }
    };

    struct ValidationRequirements
    {
        bool subcritical = false;
        bool strong_drift = false;
    };

    /// Checks every model invariant; collects issues instead of throwing.
    ValidationResult validate(const NetworkSpec &spec, ValidationRequirements require = {});

    /// validate() that throws ValidationError listing every issue.
    DriftReport validated_drift(const NetworkSpec &spec, ValidationRequirements require = {});
} // namespace gjn
