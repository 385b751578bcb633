#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "scmix/rng.hpp"
#include "scmix/tensor.hpp"

namespace scmix {

// g_h columns by g_v rows of cells. Column a spans
// [round(a*W/g_h), round((a+1)*W/g_h)), rows likewise, so cells tile the
// image exactly and differ in size by at most one pixel.
class GridGeometry {
 public:
  GridGeometry(int height, int width, int cells_x, int cells_y);

  int height() const { return height_; }
  int width() const { return width_; }
  int cells_x() const { return cells_x_; }  // g_h
  int cells_y() const { return cells_y_; }  // g_v
  int cell_count() const { return cells_x_ * cells_y_; }

  int col_begin(int a) const;  // a in [0, g_h]
  int row_begin(int b) const;  // b in [0, g_v]
  // Row-major cell index of a pixel.
  int cell_of(int y, int x) const {
    return cell_row_[static_cast<std::size_t>(y)] * cells_x_ +
           cell_col_[static_cast<std::size_t>(x)];
  }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;

 private:
  int height_;
  int width_;
  int cells_x_;
  int cells_y_;
  std::vector<int> cell_col_;
  std::vector<int> cell_row_;
};

// Draws g_h then g_v, each uniformly from `candidates`.
std::pair<int, int> sample_grid_dims(std::span<const int> candidates,
                                     RngStream& stream);

// Target index in [1, N_c] per pixel, constant inside each cell.
class GridMask : public Grid<std::uint16_t> {
 public:
  GridMask(GridGeometry geometry, int mixed_targets,
           std::vector<std::uint16_t> cell_values);
  const GridGeometry& geometry() const { return geometry_; }
  int mixed_targets() const { return mixed_targets_; }
  const std::vector<std::uint16_t>& cell_values() const { return cell_values_; }

 private:
  GridGeometry geometry_;
  int mixed_targets_;
  std::vector<std::uint16_t> cell_values_;
};

// One uniform draw from [1, N_c] per cell, cells in row-major order.
GridMask make_grid_mask(const GridGeometry& geometry, int mixed_targets,
                        RngStream& stream);

// 1 where the source pixel is pasted.
class ClassMask : public Grid<std::uint8_t> {
 public:
  ClassMask(int height, int width, std::vector<std::uint8_t> values);
};

// Number of classes pasted from a cell with `present` distinct classes:
// ceil(present / N_c), or ceil(present / 2) when N_c == 1.
int classes_to_select(int present, int mixed_targets);

// Distinct non-ignored classes of each cell, ascending, cells row-major.
std::vector<std::vector<std::uint16_t>> classes_per_cell(
    const LabelMap& labels, const GridGeometry& geometry);

// k classes drawn uniformly without replacement (partial Fisher-Yates, k
// draws), returned ascending.
std::vector<std::uint16_t> select_classes(std::vector<std::uint16_t> present,
                                          int k, RngStream& stream);

// Mask is 1 on pixels whose label is in their cell's selection.
ClassMask class_mask_from_selection(
    const LabelMap& labels, const GridGeometry& geometry,
    const std::vector<std::vector<std::uint16_t>>& selection);

ClassMask build_class_mask(const LabelMap& labels, const GridGeometry& geometry,
                           int mixed_targets, RngStream& stream);

std::vector<std::byte> serialize_tensor(const GridMask& mask);
std::vector<std::byte> serialize_tensor(const ClassMask& mask);

}  // namespace scmix
