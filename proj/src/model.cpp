#include "gjn/model.hpp"

#include "gjn/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace gjn
{
    Eigen::VectorXd NetworkSpec::arrival_rates() const
    {
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(size());
        for (int k = 0; k < size(); ++k)
        {
            if (stations[k].arrival)
                lambda(k) = stations[k].arrival->rate();
        }
        return lambda;
    }

    Eigen::VectorXd NetworkSpec::service_rates() const
    {
        Eigen::VectorXd mu(size());
        for (int k = 0; k < size(); ++k)
            mu(k) = stations[k].service.rate();
        return mu;
    }

    std::vector<int> DriftReport::drift_violations() const
    {
        std::vector<int> out;
        for (int k = 0; k < nu.size(); ++k)
        {
            if (!(nu(k) > 0.0))
                out.push_back(k);
        }
        return out;
    }

    double spectral_radius(const RoutingMatrix &routing)
    {
        const auto &p = routing.matrix();
        if (!routing.is_square())
            throw ValidationError("routing matrix is not square");
        for (Eigen::Index i = 0; i < p.rows(); ++i)
        {
            for (Eigen::Index j = 0; j < p.cols(); ++j)
            {
                if (!(p(i, j) >= 0.0 && p(i, j) <= 1.0))
                    throw ValidationError("routing entry outside [0,1] at station " + std::to_string(i + 1));
            }
        }
        if (p.rows() == 0)
            return 0.0;
        Eigen::EigenSolver<Eigen::MatrixXd> solver(p, false);
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigenvalue solver failed on routing matrix");
        return solver.eigenvalues().cwiseAbs().maxCoeff();
    }

    DriftReport solve_traffic(const NetworkSpec &spec)
    {
        const int k = spec.size();
        DriftReport report;
        report.spectral_radius = spectral_radius(spec.routing);
        if (!(report.spectral_radius < 1.0))
            throw ValidationError("routing matrix spectral radius is not below 1");

        report.lambda = spec.arrival_rates();
        report.mu = spec.service_rates();
        report.routing = spec.routing.matrix();
        const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k) - spec.routing.matrix().transpose();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
        report.effective_arrivals = lu.solve(report.lambda);
        if (!report.effective_arrivals.allFinite())
            throw NumericalError("traffic equations are singular");
        report.nu = m * report.mu - report.lambda;
        report.subcritical = (report.mu.array() > report.effective_arrivals.array()).all();
        report.strong_drift = (report.nu.array() > 0.0).all();
        return report;
    }

    ValidationResult validate(const NetworkSpec &spec, ValidationRequirements require)
    {
        ValidationResult result;
        auto error = [&](std::optional<int> station, std::string reason) {
            result.errors.push_back({station, std::move(reason)});
        };
        const int k = spec.size();
        if (k == 0)
        {
            error(std::nullopt, "network has no stations");
            return result;
        }
        const auto &p = spec.routing.matrix();
        if (p.rows() != k || p.cols() != k)
        {
            error(std::nullopt, "routing matrix must be " + std::to_string(k) + "x" + std::to_string(k));
            return result;
        }

        bool any_arrival = false;
        for (int i = 0; i < k; ++i)
        {
            const auto &st = spec.stations[i];
            if (st.arrival)
            {
                any_arrival = true;
                if (!st.arrival->equilibrium_mean())
                {
                    result.warnings.push_back(
                        {i, "interarrival law has infinite second moment: equilibrium delay has infinite mean"});
                }
            }
            if (st.initial_queue < 0)
                error(i, "initial queue is negative at station " + std::to_string(i + 1));
            double row = 0.0;
            for (int l = 0; l < k; ++l)
            {
                if (!(p(i, l) >= 0.0 && p(i, l) <= 1.0))
                    error(i, "routing entry outside [0,1] at station " + std::to_string(i + 1));
                row += p(i, l);
            }
            if (row > 1.0 + 1e-12)
                error(i, "routing row sum exceeds 1 at station " + std::to_string(i + 1));
        }
        if (!any_arrival)
            error(std::nullopt, "no station has exogenous arrivals");
        if (!result.errors.empty())
            return result;

        const double rho = spectral_radius(spec.routing);
        if (!(rho < 1.0))
        {
            error(std::nullopt, "routing matrix spectral radius " + std::to_string(rho) + " is not below 1");
            return result;
        }

        DriftReport report = solve_traffic(spec);
        for (int i = 0; i < k; ++i)
        {
            if (!(report.mu(i) > report.effective_arrivals(i)))
            {
                ValidationIssue issue{i, "station " + std::to_string(i + 1) +
                                             " is not subcritical: mu <= effective arrival rate"};
                (require.subcritical ? result.errors : result.warnings).push_back(std::move(issue));
            }
            if (!(report.nu(i) > 0.0))
            {
                ValidationIssue issue{i, "drift nu_k <= 0 at station " + std::to_string(i + 1)};
                (require.strong_drift ? result.errors : result.warnings).push_back(std::move(issue));
            }
        }
        result.report = std::move(report);
        return result;
    }

    DriftReport validated_drift(const NetworkSpec &spec, ValidationRequirements require)
    {
        ValidationResult result = validate(spec, require);
        if (!result.ok())
        {
            std::ostringstream os;
            for (std::size_t i = 0; i < result.errors.size(); ++i)
                os << (i ? "; " : "") << result.errors[i].reason;
            throw ValidationError(os.str());
        }
        return *result.report;
    }
} // namespace gjn
