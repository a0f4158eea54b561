#include "qbm/psd.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"

namespace qbm {
namespace {

// smallest eigenvalue: exact for modest sizes, Lanczos-style power estimate
// on shifted matrix beyond that
double smallest_eigenvalue(const Eigen::MatrixXd& s) {
    const int n = static_cast<int>(s.rows());
    if (n <= 1500) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    // power iteration on c*I - S with c = ||S||_inf bounds the spectrum
    const double c = s.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n).normalized();
    double mu = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = c * v - s * v;
        const double norm = w.norm();
        if (norm == 0.0) break;
        w /= norm;
        mu = norm;
        v = w;
    }
    return c - mu;
}

} // namespace

PsdFactor psd_factorize(const Eigen::MatrixXd& k, double jitter_max) {
    if (k.rows() != k.cols()) throw NumericsError("psd_factorize: matrix is not square");
    const double scale = k.cwiseAbs().maxCoeff();
    if (scale > 0.0) {
        const double asym = (k - k.transpose()).cwiseAbs().maxCoeff() / scale;
        if (asym > 1e-8) {
            std::ostringstream msg;
            msg << "psd_factorize: matrix is not symmetric (relative asymmetry " << asym << ")";
            throw NumericsError(msg.str());
        }
    }
    const Eigen::MatrixXd s = 0.5 * (k + k.transpose());
    const int n = static_cast<int>(s.rows());

    std::vector<double> ladder{0.0};
    for (double eps = jitter_max * 1e-6; eps <= jitter_max * (1.0 + 1e-12); eps *= 10.0)
        ladder.push_back(eps);

    for (double eps : ladder) {
        Eigen::MatrixXd trial = s;
        if (eps > 0.0) trial.diagonal().array() += eps;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) {
            PsdFactor out;
            out.factor = llt.matrixL();
            out.jitter = eps;
            // cheap estimate: jitter 0 succeeded -> bounded below by -(round-off);
            // otherwise the smallest eigenvalue sits between the last two rungs
            out.min_eig_estimate = (eps == 0.0) ? 0.0 : -eps;
            if (n <= 1500 && eps > 0.0) out.min_eig_estimate = smallest_eigenvalue(s);
            return out;
        }
    }
    const double lam_min = smallest_eigenvalue(s);
    std::ostringstream msg;
    msg << "psd_factorize: matrix is not positive semidefinite within jitter_max = " << jitter_max
        << " (smallest eigenvalue approximately " << lam_min << ")";
    throw NumericsError(msg.str());
}

} // namespace qbm
