#include "iblab/sweep/pca.h"

#include <Eigen/Dense>
#include <cmath>

#include "iblab/error.h"

namespace iblab {

PcaProjection pca_project_2d(const Tensor& z) {
  const std::size_t n = z.rows(), d = z.cols();
  if (n < 2) fail(ErrorKind::kData, "PCA needs at least two samples");
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> data(z.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues come back ascending.
  PcaProjection out;
  out.projected = Tensor({n, 2});
  out.total_variance = cov.trace();
  const Eigen::Index components = std::min<Eigen::Index>(2, static_cast<Eigen::Index>(d));
  for (Eigen::Index c = 0; c < components; ++c) {
    const Eigen::Index col = static_cast<Eigen::Index>(d) - 1 - c;
    Eigen::VectorXd dir = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0.0) dir = -dir;
    const Eigen::VectorXd proj = centered * dir;
    for (std::size_t i = 0; i < n; ++i) out.projected(i, static_cast<std::size_t>(c)) = proj(static_cast<Eigen::Index>(i));
    out.variance[static_cast<std::size_t>(c)] = std::max(0.0, eig.eigenvalues()(col));
  }
  return out;
}

}  // namespace iblab
