#include "panelmi/gram.hpp"

#include <string>
#include <utility>

#include "panelmi/error.hpp"

namespace panelmi {

namespace {

Eigen::MatrixXd cross(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.cols(), m.cols());
  out.selfadjointView<Eigen::Lower>().rankUpdate(m.transpose());
  return out.selfadjointView<Eigen::Lower>();
}

}  // namespace

GramCache::GramCache(Eigen::MatrixXd columns) : columns_(std::move(columns)) { gram_ = cross(columns_); }

void GramCache::replace_column(Eigen::Index k, const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (k < 0 || k >= columns_.cols() || values.size() != columns_.rows())
    throw DataError("GramCache: replacement column " + std::to_string(k) + " does not fit");
  columns_.col(k) = values;
  const Eigen::VectorXd c = columns_.transpose() * values;
  gram_.col(k) = c;
  gram_.row(k) = c.transpose();
}

Eigen::MatrixXd GramCache::subset(std::span<const Eigen::Index> selection, std::span<const Eigen::Index> keep,
                                  std::span<const Eigen::Index> drop) const {
  if (keep.size() + drop.size() != static_cast<std::size_t>(columns_.rows()))
    throw DataError("GramCache: keep and drop rows do not partition the matrix");
  const auto s = static_cast<Eigen::Index>(selection.size());
  const bool direct = keep.size() <= drop.size();
  const auto rows = direct ? keep : drop;
  Eigen::MatrixXd gathered(static_cast<Eigen::Index>(rows.size()), s);
  for (Eigen::Index j = 0; j < s; ++j) {
    const auto col = columns_.col(selection[static_cast<std::size_t>(j)]);
    for (std::size_t r = 0; r < rows.size(); ++r) gathered(static_cast<Eigen::Index>(r), j) = col(rows[r]);
  }
  Eigen::MatrixXd part = cross(gathered);
  if (direct) return part;
  Eigen::MatrixXd out(s, s);
  for (Eigen::Index j = 0; j < s; ++j)
    for (Eigen::Index i = 0; i < s; ++i)
      out(i, j) = gram_(selection[static_cast<std::size_t>(i)], selection[static_cast<std::size_t>(j)]) - part(i, j);
  return out;
}

}  // namespace panelmi
