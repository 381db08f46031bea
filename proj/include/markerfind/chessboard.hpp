#pragma once

#include <array>
#include <vector>

#include "markerfind/geometry.hpp"
#include "markerfind/image.hpp"

namespace mf {

/// Inner-corner counts: board_width corners per row, board_height per column.
struct BoardSpec {
    int board_width = 0;
    int board_height = 0;

    BoardSpec() = default;
    BoardSpec(int width, int height);

    int corner_count() const noexcept { return board_width * board_height; }
};

/// Row-major inner corners and their Harris strengths.
struct CornerGrid {
    std::vector<Point2> corners;
    std::vector<double> response;
};

struct ChessboardOptions {
    double sigma = 1.0;
    int half_window = 5;
    /// Candidates below this fraction of the strongest response are ignored.
    double relative_threshold = 0.05;
};

inline constexpr double kHarrisK = 0.04;

/**
 * Harris measure det(M) - k trace(M)^2 with k = 0.04, where M is the
 * Gaussian(sigma)-weighted structure tensor of Sobel gradients. A border of
 * width ceil(3 sigma) is zeroed. Requires sigma in [0.5, 3] and an image of
 * at least 7x7.
 */
RealImage corner_response(const GrayImage& img, double sigma);

/**
 * Sub-pixel saddle refinement. Solves sum_q w g g^T / |g| (q - c) = 0 over the
 * (2 half_window + 1)^2 window around the current estimate and iterates
 * until the update is below 0.01 px or 20 iterations pass. The total move
 * is clamped to half_window. Throws NoStructureError when the window's
 * gradients span less than two directions and ParameterError when the
 * window leaves the image.
 */
Point2 refine_subpixel(const GrayImage& img, Point2 p, int half_window);

/**
 * Finds all inner corners of one chessboard.
 *
 * Harris maxima that pass an alternating-quadrant test are refined, then a
 * lattice is grown from the strongest candidate using a homography re-fitted
 * after every ring. The result is row-major: rows hold board_width corners,
 * the row and column directions form a right-handed image frame and corner 0
 * is the board extreme with the smallest x + y. Throws NotFoundError when no
 * complete lattice of the requested size exists.
 */
CornerGrid find_chessboard_corners(const GrayImage& img, const BoardSpec& spec, const ChessboardOptions& opts = {});

/// Row-major indices of the four extreme corners.
std::array<int, 4> outer_corner_indices(const BoardSpec& spec);

/// Corners at indices 0, W-1, (H-1)W and (H-1)W + W-1.
std::array<Point2, 4> outer_corners(const CornerGrid& grid, const BoardSpec& spec);

} // namespace mf
