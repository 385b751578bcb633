#include "scmix/masking.hpp"

#include <algorithm>
#include <string>

#include "scmix/serialize.hpp"

namespace scmix {

namespace {

// round(a * extent / cells) with halves rounded up, in exact integer math.
int rounded_boundary(int a, int extent, int cells) {
  const long long num = 2LL * a * extent + cells;
  return static_cast<int>(num / (2LL * cells));
}

}  // namespace

GridGeometry::GridGeometry(int height, int width, int cells_x, int cells_y)
    : height_(height), width_(width), cells_x_(cells_x), cells_y_(cells_y) {
  if (height < 1 || width < 1) {
    throw InvalidArgument("grid geometry needs a positive image extent");
  }
  if (cells_x < 1 || cells_x > width) {
    throw InvalidArgument("g_h=" + std::to_string(cells_x) +
                          " must satisfy 1 <= g_h <= W=" + std::to_string(width));
  }
  if (cells_y < 1 || cells_y > height) {
    throw InvalidArgument("g_v=" + std::to_string(cells_y) +
                          " must satisfy 1 <= g_v <= H=" + std::to_string(height));
  }
  cell_col_.resize(static_cast<std::size_t>(width));
  for (int a = 0; a < cells_x; ++a) {
    for (int x = col_begin(a); x < col_begin(a + 1); ++x) cell_col_[x] = a;
  }
  cell_row_.resize(static_cast<std::size_t>(height));
  for (int b = 0; b < cells_y; ++b) {
    for (int y = row_begin(b); y < row_begin(b + 1); ++y) cell_row_[y] = b;
  }
}

int GridGeometry::col_begin(int a) const {
  return rounded_boundary(a, width_, cells_x_);
}

int GridGeometry::row_begin(int b) const {
  return rounded_boundary(b, height_, cells_y_);
}

std::pair<int, int> sample_grid_dims(std::span<const int> candidates,
                                     RngStream& stream) {
  if (candidates.empty()) {
    throw InvalidArgument("grid candidate set G is empty");
  }
  for (int g : candidates) {
    if (g < 1) throw InvalidArgument("grid candidates must be >= 1");
  }
  const auto last = static_cast<std::int64_t>(candidates.size()) - 1;
  const int gh = candidates[static_cast<std::size_t>(stream.uniform_int(0, last))];
  const int gv = candidates[static_cast<std::size_t>(stream.uniform_int(0, last))];
  return {gh, gv};
}

GridMask::GridMask(GridGeometry geometry, int mixed_targets,
                   std::vector<std::uint16_t> cell_values)
    : Grid(geometry.height(), geometry.width(), 1,
           std::vector<std::uint16_t>(static_cast<std::size_t>(geometry.height()) *
                                      geometry.width())),
      geometry_(std::move(geometry)), mixed_targets_(mixed_targets),
      cell_values_(std::move(cell_values)) {
  if (mixed_targets < 1) {
    throw InvalidArgument("N_c must be >= 1, got " + std::to_string(mixed_targets));
  }
  if (cell_values_.size() != static_cast<std::size_t>(geometry_.cell_count())) {
    throw ShapeMismatch("grid mask needs one value per cell");
  }
  for (auto v : cell_values_) {
    if (v < 1 || v > mixed_targets) {
      throw InvalidArgument("grid mask value " + std::to_string(v) +
                            " outside [1, N_c]");
    }
  }
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      data_[index(y, x)] = cell_values_[static_cast<std::size_t>(geometry_.cell_of(y, x))];
    }
  }
}

GridMask make_grid_mask(const GridGeometry& geometry, int mixed_targets,
                        RngStream& stream) {
  if (mixed_targets < 1) {
    throw InvalidArgument("N_c must be >= 1, got " + std::to_string(mixed_targets));
  }
  std::vector<std::uint16_t> cells(static_cast<std::size_t>(geometry.cell_count()));
  for (auto& v : cells) {
    v = static_cast<std::uint16_t>(stream.uniform_int(1, mixed_targets));
  }
  return GridMask(geometry, mixed_targets, std::move(cells));
}

ClassMask::ClassMask(int height, int width, std::vector<std::uint8_t> values)
    : Grid(height, width, 1, std::move(values)) {
  for (auto v : data_) {
    if (v > 1) throw InvalidArgument("class mask must be binary");
  }
}

int classes_to_select(int present, int mixed_targets) {
  if (present <= 0) return 0;
  const int divisor = mixed_targets == 1 ? 2 : mixed_targets;
  return (present + divisor - 1) / divisor;
}

std::vector<std::vector<std::uint16_t>> classes_per_cell(
    const LabelMap& labels, const GridGeometry& geometry) {
  require_same_extent(labels, geometry, "classes_per_cell");
  const auto c = static_cast<std::size_t>(labels.num_classes());
  std::vector<std::vector<char>> seen(
      static_cast<std::size_t>(geometry.cell_count()), std::vector<char>(c, 0));
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const auto l = labels(y, x);
      if (l == kIgnoreLabel) continue;
      seen[static_cast<std::size_t>(geometry.cell_of(y, x))][l] = 1;
    }
  }
  std::vector<std::vector<std::uint16_t>> out(seen.size());
  for (std::size_t cell = 0; cell < seen.size(); ++cell) {
    for (std::size_t k = 0; k < c; ++k) {
      if (seen[cell][k]) out[cell].push_back(static_cast<std::uint16_t>(k));
    }
  }
  return out;
}

std::vector<std::uint16_t> select_classes(std::vector<std::uint16_t> present,
                                          int k, RngStream& stream) {
  const auto n = static_cast<std::int64_t>(present.size());
  if (k < 0 || k > n) {
    throw InvalidArgument("cannot select " + std::to_string(k) + " of " +
                          std::to_string(n) + " classes");
  }
  for (std::int64_t i = 0; i < k; ++i) {
    const auto j = stream.uniform_int(i, n - 1);
    std::swap(present[static_cast<std::size_t>(i)], present[static_cast<std::size_t>(j)]);
  }
  present.resize(static_cast<std::size_t>(k));
  std::sort(present.begin(), present.end());
  return present;
}

ClassMask class_mask_from_selection(
    const LabelMap& labels, const GridGeometry& geometry,
    const std::vector<std::vector<std::uint16_t>>& selection) {
  require_same_extent(labels, geometry, "class_mask_from_selection");
  if (selection.size() != static_cast<std::size_t>(geometry.cell_count())) {
    throw ShapeMismatch("class selection needs one entry per cell");
  }
  std::vector<std::uint8_t> mask(labels.pixel_count(), 0);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const auto l = labels(y, x);
      if (l == kIgnoreLabel) continue;
      const auto& chosen = selection[static_cast<std::size_t>(geometry.cell_of(y, x))];
      if (std::binary_search(chosen.begin(), chosen.end(), l)) {
        mask[labels.index(y, x)] = 1;
      }
    }
  }
  return ClassMask(labels.height(), labels.width(), std::move(mask));
}

ClassMask build_class_mask(const LabelMap& labels, const GridGeometry& geometry,
                           int mixed_targets, RngStream& stream) {
  if (mixed_targets < 1) {
    throw InvalidArgument("N_c must be >= 1, got " + std::to_string(mixed_targets));
  }
  auto present = classes_per_cell(labels, geometry);
  std::vector<std::vector<std::uint16_t>> selection;
  selection.reserve(present.size());
  for (auto& cell : present) {
    const int k = classes_to_select(static_cast<int>(cell.size()), mixed_targets);
    selection.push_back(select_classes(std::move(cell), k, stream));
  }
  return class_mask_from_selection(labels, geometry, selection);
}

std::vector<std::byte> serialize_tensor(const GridMask& mask) {
  RawTensor raw;
  raw.kind = TensorKind::kGridMask;
  raw.height = static_cast<std::uint32_t>(mask.height());
  raw.width = static_cast<std::uint32_t>(mask.width());
  raw.channels = 1;
  raw.u16.assign(mask.values().begin(), mask.values().end());
  return encode_raw(raw);
}

std::vector<std::byte> serialize_tensor(const ClassMask& mask) {
  RawTensor raw;
  raw.kind = TensorKind::kClassMask;
  raw.height = static_cast<std::uint32_t>(mask.height());
  raw.width = static_cast<std::uint32_t>(mask.width());
  raw.channels = 1;
  raw.u16.assign(mask.values().begin(), mask.values().end());
  return encode_raw(raw);
}

}  // namespace scmix
