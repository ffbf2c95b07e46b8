#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shmtk/common.hpp"

namespace shmtk::geom {

struct Rect {
    Point2 min;
    Point2 max;

    bool valid() const { return min.x < max.x && min.y < max.y; }
    bool contains(const Point2& p, double tol = 0.0) const {
        return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol && p.y <= max.y + tol;
    }
    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
};

// Closed simple polygon, vertices in order (either winding).
struct Polygon {
    std::vector<Point2> vertices;
};

bool point_in_polygon(const Polygon& poly, const Point2& p, double boundary_tol = 1e-9);

// Binary raster on a fixed grid. Cell (col,row) is centered at
// origin + (col,row)*resolution; all geometry below works in cell centers.
class ShapeMask {
public:
    ShapeMask() = default;
    ShapeMask(int width, int height, double resolution_mm, Point2 origin_mm);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    Point2 origin() const { return origin_; }

    bool at(int col, int row) const { return bits_[index(col, row)] != 0; }
    void set(int col, int row, bool v) { bits_[index(col, row)] = v ? 1 : 0; }
    bool in_bounds(int col, int row) const {
        return col >= 0 && col < width_ && row >= 0 && row < height_;
    }

    std::size_t foreground_count() const;
    bool same_grid(const ShapeMask& o) const {
        return width_ == o.width_ && height_ == o.height_;
    }

    Point2 cell_center(int col, int row) const {
        return {origin_.x + col * resolution_, origin_.y + row * resolution_};
    }

    const std::vector<std::uint8_t>& bits() const { return bits_; }
    std::vector<std::uint8_t>& bits() { return bits_; }

private:
    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * width_ + col;
    }
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 1.0;
    Point2 origin_{};
    std::vector<std::uint8_t> bits_;
};

struct SegmentXY {
    Point2 start;
    Point2 end;
};

// Supercover rasterization: a cell is set iff the segment intersects the
// closed square of side `resolution` centered on the cell. Grid covers the
// segment bounding box plus `padding` on every side.
ShapeMask rasterize(const std::vector<SegmentXY>& segments, double resolution, double padding);

ShapeMask convex_hull_mask(const ShapeMask& mask);

// Dilation then erosion with a (2r+1)^2 square element. Erosion treats
// out-of-grid as foreground so closing never loses border cells.
ShapeMask binary_closing(const ShapeMask& mask, int radius);

// Single 8-connected foreground component; empty mask counts as connected.
bool is_connected(const ShapeMask& mask);

// Moore boundary trace of the outer contour (through cell centers), then
// Douglas-Peucker simplification. Vertices re-inserted as needed so every
// foreground cell center stays inside or on the polygon.
Polygon extract_boundary_polygon(const ShapeMask& mask, double simplify_tolerance_mm);

// Matrix Procrustes disparity in [0,1]: masks as H x W matrices, column-mean
// centered, unit Frobenius norm, orthogonal alignment via SVD with optimal
// scale; disparity = 1 - (sum of singular values)^2. Grid translations,
// rotations and flips act on row space where the orthogonal alignment cannot
// see them, so each argument is anchored (foreground moved to the grid
// corner) and the value is minimized over the dihedral orbit of both sides.
// Symmetric; exactly invariant under translating either shape and under
// 90/180/270-degree rotation or flips of either shape on square grids.
double procrustes_disparity(const ShapeMask& a, const ShapeMask& b);

// popcount(result AND img_neg)
std::size_t added_area(const ShapeMask& result, const ShapeMask& img_neg);

// Everything not reachable from the grid border through background
// (4-connected): the filled interior plus the shape itself.
ShapeMask fill_interior(const ShapeMask& mask);

Rect mask_bounding_rect(const ShapeMask& mask);

// PGM (P5, 0/255) plus JSON sidecar {resolution_mm, origin_x_mm, origin_y_mm}.
void save_mask_pgm(const ShapeMask& mask, const std::string& pgm_path);
ShapeMask load_mask_pgm(const std::string& pgm_path);

} // namespace shmtk::geom
