#include "subshape/synthetic.hpp"

#include "subshape/error.hpp"

#include <charconv>
#include <random>

namespace subshape {

Dataset make_blobs(const BlobOptions& o) {
  if (o.points < 1 || o.dims < 1 || o.clusters < 1) throw Error("blob generator needs positive sizes");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, o.spread);

  Eigen::MatrixXd centers(o.clusters, o.dims);
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = uniform(rng);

  Dataset d;
  d.values.resize(o.points, o.dims);
  for (int c = 0; c < o.dims; ++c) d.column_names.push_back("attr" + std::to_string(c));
  for (int c = 0; c < o.clusters; ++c) d.label_names.push_back("team" + std::to_string(c));
  for (int p = 0; p < o.points; ++p) {
    const int label = p % o.clusters;
    const bool outlier = uniform(rng) < o.outlier_fraction;
    for (int a = 0; a < o.dims; ++a) {
      d.values(p, a) = outlier ? uniform(rng) * 1.5 - 0.25 : centers(label, a) + normal(rng);
    }
    d.labels.push_back(label);
    d.point_ids.push_back(p);
  }
  return d;
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (const auto& name : data.column_names) out += name + ",";
  out += "cluster\n";
  char buf[32];
  for (Eigen::Index r = 0; r < data.n_points(); ++r) {
    for (Eigen::Index c = 0; c < data.n_dims(); ++c) {
      const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, data.values(r, c));
      (void)ec;
      out.append(buf, end);
      out += ',';
    }
    const int label = data.labels[static_cast<std::size_t>(r)];
    out += static_cast<std::size_t>(label) < data.label_names.size() ? data.label_names[static_cast<std::size_t>(label)]
                                                                     : std::to_string(label);
    out += '\n';
  }
  return out;
}

}  // namespace subshape
