#include "shmtk/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <json.hpp>

namespace shmtk::geom {

namespace {

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 ab = b - a;
    const double len2 = ab.dot(ab);
    if (len2 == 0.0) return (p - a).norm();
    double t = (p - a).dot(ab) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const Point2 proj = a + ab * t;
    return (p - proj).norm();
}

} // namespace

bool point_in_polygon(const Polygon& poly, const Point2& p, double boundary_tol) {
    const auto& v = poly.vertices;
    const std::size_t n = v.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (point_segment_distance(p, v[i], v[(i + 1) % n]) <= boundary_tol) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const bool cross = (v[i].y > p.y) != (v[j].y > p.y);
        if (cross) {
            const double xint = v[j].x + (v[i].x - v[j].x) * (p.y - v[j].y) / (v[i].y - v[j].y);
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

ShapeMask::ShapeMask(int width, int height, double resolution_mm, Point2 origin_mm)
    : width_(width), height_(height), resolution_(resolution_mm), origin_(origin_mm),
      bits_(static_cast<std::size_t>(width) * height, 0) {
    if (width < 1 || height < 1) throw Error("ShapeMask: width and height must be >= 1");
    if (resolution_mm <= 0.0) throw Error("ShapeMask: resolution must be > 0");
}

std::size_t ShapeMask::foreground_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

namespace {

// Liang-Barsky: does the segment intersect the closed box?
bool segment_hits_box(double x0, double y0, double x1, double y1,
                      double bx0, double by0, double bx1, double by1) {
    const double dx = x1 - x0;
    const double dy = y1 - y0;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {x0 - bx0, bx1 - x0, y0 - by0, by1 - y0};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return false;
        } else {
            const double r = q[i] / p[i];
            if (p[i] < 0.0) {
                if (r > t1) return false;
                if (r > t0) t0 = r;
            } else {
                if (r < t0) return false;
                if (r < t1) t1 = r;
            }
        }
    }
    return t0 <= t1;
}

} // namespace

ShapeMask rasterize(const std::vector<SegmentXY>& segments, double resolution, double padding) {
    if (resolution <= 0.0) throw Error("rasterize: resolution must be > 0");
    if (segments.empty()) throw Error("rasterize: empty layer");

    double minx = std::numeric_limits<double>::infinity(), miny = minx;
    double maxx = -minx, maxy = -minx;
    for (const SegmentXY& s : segments) {
        minx = std::min({minx, s.start.x, s.end.x});
        miny = std::min({miny, s.start.y, s.end.y});
        maxx = std::max({maxx, s.start.x, s.end.x});
        maxy = std::max({maxy, s.start.y, s.end.y});
    }
    const Point2 origin{minx - padding, miny - padding};
    const int width = static_cast<int>(std::ceil((maxx + padding - origin.x) / resolution)) + 1;
    const int height = static_cast<int>(std::ceil((maxy + padding - origin.y) / resolution)) + 1;
    ShapeMask mask(width, height, resolution, origin);

    for (const SegmentXY& s : segments) {
        // work in cell coordinates; cell (i,j) is the closed box [i-.5,i+.5]x[j-.5,j+.5]
        const double ax = (s.start.x - origin.x) / resolution;
        const double ay = (s.start.y - origin.y) / resolution;
        const double bx = (s.end.x - origin.x) / resolution;
        const double by = (s.end.y - origin.y) / resolution;
        const double len = std::hypot(bx - ax, by - ay);
        if (len == 0.0) {
            const int c = static_cast<int>(std::lround(ax));
            const int r = static_cast<int>(std::lround(ay));
            if (mask.in_bounds(c, r)) mask.set(c, r, true);
            continue;
        }
        const int steps = std::max(1, static_cast<int>(std::ceil(len * 4.0)));
        int prev_c = std::numeric_limits<int>::min(), prev_r = prev_c;
        for (int k = 0; k <= steps; ++k) {
            const double t = static_cast<double>(k) / steps;
            const double px = ax + t * (bx - ax);
            const double py = ay + t * (by - ay);
            const int cc = static_cast<int>(std::lround(px));
            const int cr = static_cast<int>(std::lround(py));
            if (cc == prev_c && cr == prev_r) continue;
            prev_c = cc;
            prev_r = cr;
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    const int c = cc + dc, r = cr + dr;
                    if (!mask.in_bounds(c, r) || mask.at(c, r)) continue;
                    if (segment_hits_box(ax, ay, bx, by, c - 0.5, r - 0.5, c + 0.5, r + 0.5))
                        mask.set(c, r, true);
                }
            }
        }
    }
    return mask;
}

namespace {

struct CellPt {
    long long x, y;
};

long long cross3(const CellPt& o, const CellPt& a, const CellPt& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Monotone chain, collinear points dropped.
std::vector<CellPt> convex_hull_cells(std::vector<CellPt> pts) {
    std::sort(pts.begin(), pts.end(), [](const CellPt& a, const CellPt& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const CellPt& a, const CellPt& b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    const std::size_t n = pts.size();
    if (n < 3) return pts;
    std::vector<CellPt> hull(2 * n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = n - 1; i-- > 0;) {
        while (k >= lower && cross3(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

// Inclusive test with exact integer arithmetic (hull is counterclockwise).
bool cell_in_hull(const std::vector<CellPt>& hull, const CellPt& p) {
    const std::size_t n = hull.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (cross3(hull[i], hull[(i + 1) % n], p) < 0) return false;
    }
    return true;
}

bool on_segment_collinear(const CellPt& a, const CellPt& b, const CellPt& p) {
    if (cross3(a, b, p) != 0) return false;
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

} // namespace

ShapeMask convex_hull_mask(const ShapeMask& mask) {
    std::vector<CellPt> pts;
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (mask.at(c, r)) pts.push_back({c, r});
    if (pts.empty()) throw Error("convex_hull_mask: empty mask");

    ShapeMask out(mask.width(), mask.height(), mask.resolution(), mask.origin());
    const std::vector<CellPt> hull = convex_hull_cells(pts);
    if (hull.size() == 1) {
        out.set(static_cast<int>(hull[0].x), static_cast<int>(hull[0].y), true);
        return out;
    }
    if (hull.size() == 2) {
        for (const CellPt& p : pts) out.set(static_cast<int>(p.x), static_cast<int>(p.y), true);
        for (int r = 0; r < mask.height(); ++r)
            for (int c = 0; c < mask.width(); ++c)
                if (on_segment_collinear(hull[0], hull[1], {c, r})) out.set(c, r, true);
        return out;
    }
    long long minx = hull[0].x, maxx = hull[0].x, miny = hull[0].y, maxy = hull[0].y;
    for (const CellPt& p : hull) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    for (long long r = miny; r <= maxy; ++r)
        for (long long c = minx; c <= maxx; ++c)
            if (cell_in_hull(hull, {c, r})) out.set(static_cast<int>(c), static_cast<int>(r), true);
    return out;
}

namespace {

// Separable square-element passes. `outside` is the value assumed beyond the
// grid; erosion uses true so closing stays extensive at borders.
ShapeMask square_pass(const ShapeMask& in, int radius, bool take_max, bool outside) {
    ShapeMask mid(in.width(), in.height(), in.resolution(), in.origin());
    for (int r = 0; r < in.height(); ++r) {
        for (int c = 0; c < in.width(); ++c) {
            bool acc = !take_max;
            for (int d = -radius; d <= radius; ++d) {
                const int cc = c + d;
                const bool v = in.in_bounds(cc, r) ? in.at(cc, r) : outside;
                if (take_max)
                    acc = acc || v;
                else
                    acc = acc && v;
            }
            mid.set(c, r, acc);
        }
    }
    ShapeMask out(in.width(), in.height(), in.resolution(), in.origin());
    for (int r = 0; r < in.height(); ++r) {
        for (int c = 0; c < in.width(); ++c) {
            bool acc = !take_max;
            for (int d = -radius; d <= radius; ++d) {
                const int rr = r + d;
                const bool v = mid.in_bounds(c, rr) ? mid.at(c, rr) : outside;
                if (take_max)
                    acc = acc || v;
                else
                    acc = acc && v;
            }
            out.set(c, r, acc);
        }
    }
    return out;
}

} // namespace

ShapeMask binary_closing(const ShapeMask& mask, int radius) {
    if (radius < 1) throw Error("binary_closing: radius must be >= 1");
    const ShapeMask dilated = square_pass(mask, radius, /*take_max=*/true, /*outside=*/false);
    return square_pass(dilated, radius, /*take_max=*/false, /*outside=*/true);
}

bool is_connected(const ShapeMask& mask) {
    const int W = mask.width(), H = mask.height();
    int start_c = -1, start_r = -1;
    std::size_t total = 0;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            if (mask.at(c, r)) {
                ++total;
                if (start_c < 0) {
                    start_c = c;
                    start_r = r;
                }
            }
    if (total == 0) return true;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(W) * H, 0);
    std::queue<std::pair<int, int>> q;
    q.push({start_c, start_r});
    seen[static_cast<std::size_t>(start_r) * W + start_c] = 1;
    std::size_t reached = 0;
    while (!q.empty()) {
        auto [c, r] = q.front();
        q.pop();
        ++reached;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                if (dr == 0 && dc == 0) continue;
                const int cc = c + dc, rr = r + dr;
                if (!mask.in_bounds(cc, rr) || !mask.at(cc, rr)) continue;
                std::uint8_t& s = seen[static_cast<std::size_t>(rr) * W + cc];
                if (!s) {
                    s = 1;
                    q.push({cc, rr});
                }
            }
    }
    return reached == total;
}

namespace {

// Moore boundary following (8-neighborhood, clockwise), Jacob's stopping
// criterion. Returns boundary cells in trace order.
std::vector<std::pair<int, int>> moore_contour(const ShapeMask& mask) {
    // neighbors in clockwise order starting from W
    static const int dc[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    static const int dr[8] = {0, -1, -1, -1, 0, 1, 1, 1};

    int sc = -1, sr = -1;
    for (int r = 0; r < mask.height() && sc < 0; ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (mask.at(c, r)) {
                sc = c;
                sr = r;
                break;
            }
    if (sc < 0) return {};

    std::vector<std::pair<int, int>> contour;
    int cc = sc, cr = sr;
    int backtrack = 0; // came from the west (scan order guarantees west neighbor is background)
    int start_dir = -1;
    while (true) {
        contour.push_back({cc, cr});
        int dir = (backtrack + 1) % 8;
        int found = -1;
        for (int k = 0; k < 8; ++k) {
            const int d = (dir + k) % 8;
            const int nc = cc + dc[d], nr = cr + dr[d];
            if (mask.in_bounds(nc, nr) && mask.at(nc, nr)) {
                found = d;
                break;
            }
        }
        if (found < 0) break; // isolated cell
        if (cc == sc && cr == sr) {
            if (start_dir < 0)
                start_dir = found;
            else if (found == start_dir && contour.size() > 1)
                break;
        }
        cc += dc[found];
        cr += dr[found];
        if (cc == sc && cr == sr && start_dir >= 0) {
            // check the next departure against the first one
            backtrack = (found + 4) % 8;
            int dir2 = (backtrack + 1) % 8;
            int found2 = -1;
            for (int k = 0; k < 8; ++k) {
                const int d = (dir2 + k) % 8;
                const int nc = cc + dc[d], nr = cr + dr[d];
                if (mask.in_bounds(nc, nr) && mask.at(nc, nr)) {
                    found2 = d;
                    break;
                }
            }
            if (found2 == start_dir) break;
            continue;
        }
        backtrack = (found + 4) % 8;
    }
    return contour;
}

void douglas_peucker(const std::vector<Point2>& pts, std::size_t lo, std::size_t hi,
                     double tol, std::vector<std::uint8_t>& keep) {
    if (hi <= lo + 1) return;
    double max_d = -1.0;
    std::size_t max_i = lo;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const double d = point_segment_distance(pts[i], pts[lo], pts[hi]);
        if (d > max_d) {
            max_d = d;
            max_i = i;
        }
    }
    if (max_d >= tol && max_d > 0.0) {
        keep[max_i] = 1;
        douglas_peucker(pts, lo, max_i, tol, keep);
        douglas_peucker(pts, max_i, hi, tol, keep);
    }
}

} // namespace

Polygon extract_boundary_polygon(const ShapeMask& mask, double simplify_tolerance_mm) {
    if (!is_connected(mask)) {
        throw Error("extract_boundary_polygon: disconnected mask; apply binary_closing or "
                    "connect the shape first");
    }
    std::vector<std::pair<int, int>> contour = moore_contour(mask);
    // the trace can revisit cells on thin necks; a closed loop needs 3 distinct
    std::vector<std::pair<int, int>> distinct = contour;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 3) throw Error("extract_boundary_polygon: fewer than 3 boundary cells");
    bool collinear = true;
    for (std::size_t i = 2; i < distinct.size() && collinear; ++i) {
        const long long cross =
            static_cast<long long>(distinct[1].first - distinct[0].first) *
                (distinct[i].second - distinct[0].second) -
            static_cast<long long>(distinct[1].second - distinct[0].second) *
                (distinct[i].first - distinct[0].first);
        if (cross != 0) collinear = false;
    }
    if (collinear)
        throw Error("extract_boundary_polygon: fewer than 3 non-collinear boundary cells");

    std::vector<Point2> pts;
    pts.reserve(contour.size());
    for (auto [c, r] : contour) pts.push_back(mask.cell_center(c, r));

    std::vector<std::uint8_t> keep(pts.size(), 0);
    keep.front() = 1;
    if (simplify_tolerance_mm <= 0.0) {
        std::fill(keep.begin(), keep.end(), 1);
    } else {
        // split the closed contour at the point farthest from pts[0]
        std::size_t far_i = 0;
        double far_d = -1.0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double d = (pts[i] - pts[0]).norm();
            if (d > far_d) {
                far_d = d;
                far_i = i;
            }
        }
        keep[far_i] = 1;
        douglas_peucker(pts, 0, far_i, simplify_tolerance_mm, keep);
        // second half wraps around: view as open chain far_i..end..0 by appending start
        std::vector<Point2> tail(pts.begin() + far_i, pts.end());
        tail.push_back(pts[0]);
        std::vector<std::uint8_t> keep_tail(tail.size(), 0);
        douglas_peucker(tail, 0, tail.size() - 1, simplify_tolerance_mm, keep_tail);
        for (std::size_t i = 0; i + 1 < tail.size(); ++i)
            if (keep_tail[i]) keep[far_i + i] = 1;
    }

    auto build = [&]() {
        Polygon poly;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (keep[i]) poly.vertices.push_back(pts[i]);
        return poly;
    };

    // containment repair: simplification may cut corners past cell centers
    std::vector<Point2> centers;
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (mask.at(c, r)) centers.push_back(mask.cell_center(c, r));

    Polygon poly = build();
    const double tol = 1e-9;
    for (int guard = 0; guard < 10000; ++guard) {
        Point2 bad;
        bool found = false;
        for (const Point2& p : centers) {
            if (!point_in_polygon(poly, p, tol)) {
                bad = p;
                found = true;
                break;
            }
        }
        if (!found) return poly;
        std::size_t best = pts.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (keep[i]) continue;
            const double d = (pts[i] - bad).norm();
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        if (best == pts.size())
            throw Error("extract_boundary_polygon: cannot contain all foreground cells "
                        "(mask too thin for a simple outer polygon)");
        keep[best] = 1;
        poly = build();
    }
    throw Error("extract_boundary_polygon: containment repair did not converge");
}

namespace {

using Eigen::MatrixXd;

MatrixXd standardize(const MatrixXd& a) {
    MatrixXd c = a.rowwise() - a.colwise().mean();
    const double norm = c.norm();
    if (norm < 1e-12) throw Error("procrustes_disparity: zero-norm shape");
    return c / norm;
}

double plain_procrustes(const MatrixXd& as, const MatrixXd& bs) {
    // sum of singular values of as^T * bs, via the eigenvalues of its Gram
    // matrix (more robust than SVD on the rank-deficient matrices masks make)
    const MatrixXd m = as.transpose() * bs;
    const MatrixXd gram = m.transpose() * m;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (int i = 0; i < eig.eigenvalues().size(); ++i)
        s += std::sqrt(std::max(eig.eigenvalues()(i), 0.0));
    return std::clamp(1.0 - s * s, 0.0, 1.0);
}

// The dihedral orbit of the mask with the foreground anchored at the grid
// corner, already standardized. Anchoring absorbs translations exactly;
// fliplr variants reduce to column permutations of anchored content, which
// singular values ignore, so {id, flipud, transpose, flipud∘transpose}
// covers the whole orbit.
std::vector<MatrixXd> anchored_forms(const ShapeMask& m) {
    int minc = m.width(), minr = m.height(), maxc = -1, maxr = -1;
    std::vector<std::pair<int, int>> cells; // (row, col)
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c)
            if (m.at(c, r)) {
                cells.push_back({r, c});
                minc = std::min(minc, c);
                minr = std::min(minr, r);
                maxc = std::max(maxc, c);
                maxr = std::max(maxr, r);
            }
    const int h = maxr - minr + 1;
    const int w = maxc - minc + 1;
    const bool square_grid = m.width() == m.height();

    std::vector<MatrixXd> forms;
    const int nforms = square_grid ? 4 : 2;
    for (int f = 0; f < nforms; ++f)
        forms.emplace_back(MatrixXd::Zero(m.height(), m.width()));
    for (auto [r, c] : cells) {
        const int i = r - minr, j = c - minc;
        forms[0](i, j) = 1.0;
        forms[1](h - 1 - i, j) = 1.0;
        if (square_grid) {
            forms[2](j, i) = 1.0;
            forms[3](w - 1 - j, i) = 1.0;
        }
    }
    for (MatrixXd& f : forms) f = standardize(f);
    return forms;
}

} // namespace

// Procrustes disparity minimized over the dihedral orbit of both anchored
// arguments: symmetric and exactly invariant under translation of either
// shape and under 90/180/270-degree rotation or flips on square grids.
double procrustes_disparity(const ShapeMask& a, const ShapeMask& b) {
    if (!a.same_grid(b)) throw Error("procrustes_disparity: dimension mismatch");
    if (a.foreground_count() == 0 || b.foreground_count() == 0)
        throw Error("procrustes_disparity: zero-norm shape");
    const std::vector<MatrixXd> fa = anchored_forms(a);
    const std::vector<MatrixXd> fb = anchored_forms(b);
    double best = std::numeric_limits<double>::infinity();
    for (const MatrixXd& x : fa)
        for (const MatrixXd& y : fb) best = std::min(best, plain_procrustes(x, y));
    return best;
}

std::size_t added_area(const ShapeMask& result, const ShapeMask& img_neg) {
    if (!result.same_grid(img_neg)) throw Error("added_area: dimension mismatch");
    std::size_t n = 0;
    const auto& a = result.bits();
    const auto& b = img_neg.bits();
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] & b[i]);
    return n;
}

ShapeMask fill_interior(const ShapeMask& mask) {
    const int W = mask.width(), H = mask.height();
    std::vector<std::uint8_t> exterior(static_cast<std::size_t>(W) * H, 0);
    std::deque<std::pair<int, int>> q;
    auto push = [&](int c, int r) {
        if (!mask.in_bounds(c, r) || mask.at(c, r)) return;
        std::uint8_t& e = exterior[static_cast<std::size_t>(r) * W + c];
        if (!e) {
            e = 1;
            q.push_back({c, r});
        }
    };
    for (int c = 0; c < W; ++c) {
        push(c, 0);
        push(c, H - 1);
    }
    for (int r = 0; r < H; ++r) {
        push(0, r);
        push(W - 1, r);
    }
    while (!q.empty()) {
        auto [c, r] = q.front();
        q.pop_front();
        push(c + 1, r);
        push(c - 1, r);
        push(c, r + 1);
        push(c, r - 1);
    }
    ShapeMask out(W, H, mask.resolution(), mask.origin());
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c)
            out.set(c, r, exterior[static_cast<std::size_t>(r) * W + c] == 0);
    return out;
}

Rect mask_bounding_rect(const ShapeMask& mask) {
    int minc = mask.width(), maxc = -1, minr = mask.height(), maxr = -1;
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            if (mask.at(c, r)) {
                minc = std::min(minc, c);
                maxc = std::max(maxc, c);
                minr = std::min(minr, r);
                maxr = std::max(maxr, r);
            }
    if (maxc < 0) throw Error("mask_bounding_rect: empty mask");
    const Point2 lo = mask.cell_center(minc, minr);
    const Point2 hi = mask.cell_center(maxc, maxr);
    return {lo, hi};
}

void save_mask_pgm(const ShapeMask& mask, const std::string& pgm_path) {
    std::ofstream f(pgm_path, std::ios::binary);
    if (!f) throw Error("save_mask_pgm: cannot open " + pgm_path);
    f << "P5\n" << mask.width() << " " << mask.height() << "\n255\n";
    for (int r = 0; r < mask.height(); ++r)
        for (int c = 0; c < mask.width(); ++c)
            f.put(mask.at(c, r) ? static_cast<char>(255) : static_cast<char>(0));
    if (!f) throw Error("save_mask_pgm: write failed for " + pgm_path);
    f.close();

    nlohmann::ordered_json meta;
    meta["resolution_mm"] = mask.resolution();
    meta["origin_x_mm"] = mask.origin().x;
    meta["origin_y_mm"] = mask.origin().y;
    std::ofstream j(pgm_path + ".json");
    if (!j) throw Error("save_mask_pgm: cannot open " + pgm_path + ".json");
    j << meta.dump(2) << "\n";
}

ShapeMask load_mask_pgm(const std::string& pgm_path) {
    std::ifstream f(pgm_path, std::ios::binary);
    if (!f) throw Error("load_mask_pgm: cannot open " + pgm_path);
    std::string magic;
    f >> magic;
    if (magic != "P5") throw Error("load_mask_pgm: not a P5 PGM: " + pgm_path);
    int width = 0, height = 0, maxval = 0;
    f >> width >> height >> maxval;
    f.get(); // single whitespace after header
    if (width < 1 || height < 1 || maxval != 255)
        throw Error("load_mask_pgm: unsupported PGM header in " + pgm_path);

    double resolution = 1.0;
    Point2 origin{0.0, 0.0};
    std::ifstream j(pgm_path + ".json");
    if (j) {
        nlohmann::json meta = nlohmann::json::parse(j);
        resolution = meta.at("resolution_mm").get<double>();
        origin.x = meta.at("origin_x_mm").get<double>();
        origin.y = meta.at("origin_y_mm").get<double>();
    }
    ShapeMask mask(width, height, resolution, origin);
    std::vector<char> row(static_cast<std::size_t>(width));
    for (int r = 0; r < height; ++r) {
        f.read(row.data(), width);
        if (!f) throw Error("load_mask_pgm: truncated pixel data in " + pgm_path);
        for (int c = 0; c < width; ++c)
            mask.set(c, r, static_cast<unsigned char>(row[c]) >= 128);
    }
    return mask;
}

} // namespace shmtk::geom
