#include "signvar/rng.hpp"

namespace signvar {

Rng::Rng(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffULL),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id & 0xffffffffULL),
                    static_cast<std::uint32_t>(stream_id >> 32)};
  engine_.seed(seq);
}

void Rng::fill_normal(Eigen::Ref<Eigen::MatrixXd> out) {
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal();
  }
}

Eigen::MatrixXd Rng::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  fill_normal(out);
  return out;
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index size) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = normal();
  return out;
}

}  // namespace signvar
