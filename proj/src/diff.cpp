#include "mergemine/diff.hpp"

#include <algorithm>

#include "mergemine/errors.hpp"

namespace mergemine::diff {
namespace {

using Lines = std::vector<std::string_view>;

struct Snake {
    // Middle snake endpoints in local coordinates.
    std::size_t x_start, y_start, x_end, y_end;
};

class Solver {
   public:
    Solver(const Lines& a, const Lines& b) : a_(a), b_(b) {
        std::size_t cap = a.size() + b.size() + 3;
        vf_.resize(2 * cap + 1);
        vb_.resize(2 * cap + 1);
        offset_ = static_cast<std::ptrdiff_t>(cap);
    }

    LineEdits run() {
        solve(0, a_.size(), 0, b_.size());
        return std::move(edits_);
    }

   private:
    // Finds the middle snake of a[lo1..hi1) vs b[lo2..hi2).
    // Preconditions: both ranges nonempty, no common prefix or suffix.
    Snake middle_snake(std::size_t lo1, std::size_t hi1, std::size_t lo2,
                       std::size_t hi2) {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(hi1 - lo1);
        const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(hi2 - lo2);
        const std::ptrdiff_t delta = n - m;
        const bool odd = (delta & 1) != 0;
        std::ptrdiff_t* vf = vf_.data() + offset_;
        std::ptrdiff_t* vb = vb_.data() + offset_;
        vf[1] = 0;
        vb[1] = 0;
        const std::ptrdiff_t dmax = (n + m + 1) / 2 + 1;

        for (std::ptrdiff_t d = 0; d <= dmax; ++d) {
            // Forward paths, diagonals k = x - y.
            for (std::ptrdiff_t k = -d; k <= d; k += 2) {
                std::ptrdiff_t x;
                if (k == -d || (k != d && vf[k - 1] < vf[k + 1]))
                    x = vf[k + 1];
                else
                    x = vf[k - 1] + 1;
                std::ptrdiff_t y = x - k;
                const std::ptrdiff_t x0 = x, y0 = y;
                while (x < n && y < m &&
                       a_[lo1 + static_cast<std::size_t>(x)] ==
                           b_[lo2 + static_cast<std::size_t>(y)]) {
                    ++x;
                    ++y;
                }
                vf[k] = x;
                if (odd && k - delta >= -(d - 1) && k - delta <= d - 1 &&
                    vf[k] + vb[delta - k] >= n) {
                    return Snake{lo1 + static_cast<std::size_t>(x0),
                                 lo2 + static_cast<std::size_t>(y0),
                                 lo1 + static_cast<std::size_t>(x),
                                 lo2 + static_cast<std::size_t>(y)};
                }
            }
            // Reverse paths over the mirrored sequences.
            for (std::ptrdiff_t k = -d; k <= d; k += 2) {
                std::ptrdiff_t x;
                if (k == -d || (k != d && vb[k - 1] < vb[k + 1]))
                    x = vb[k + 1];
                else
                    x = vb[k - 1] + 1;
                std::ptrdiff_t y = x - k;
                const std::ptrdiff_t x0 = x, y0 = y;
                while (x < n && y < m &&
                       a_[lo1 + static_cast<std::size_t>(n - 1 - x)] ==
                           b_[lo2 + static_cast<std::size_t>(m - 1 - y)]) {
                    ++x;
                    ++y;
                }
                vb[k] = x;
                if (!odd && delta - k >= -d && delta - k <= d &&
                    vb[k] + vf[delta - k] >= n) {
                    // Map the reverse snake back to forward coordinates.
                    return Snake{lo1 + static_cast<std::size_t>(n - x),
                                 lo2 + static_cast<std::size_t>(m - y),
                                 lo1 + static_cast<std::size_t>(n - x0),
                                 lo2 + static_cast<std::size_t>(m - y0)};
                }
            }
        }
        throw ContractError("myers_diff: middle snake search overran bound");
    }

    void solve(std::size_t lo1, std::size_t hi1, std::size_t lo2,
               std::size_t hi2) {
        while (lo1 < hi1 && lo2 < hi2 && a_[lo1] == b_[lo2]) {
            ++lo1;
            ++lo2;
        }
        while (hi1 > lo1 && hi2 > lo2 && a_[hi1 - 1] == b_[hi2 - 1]) {
            --hi1;
            --hi2;
        }
        if (lo1 == hi1) {
            for (std::size_t j = lo2; j < hi2; ++j) edits_.added.push_back(j);
            return;
        }
        if (lo2 == hi2) {
            for (std::size_t i = lo1; i < hi1; ++i) edits_.removed.push_back(i);
            return;
        }
        Snake s = middle_snake(lo1, hi1, lo2, hi2);
        bool left_whole = s.x_start == hi1 && s.y_start == hi2;
        bool right_whole = s.x_end == lo1 && s.y_end == lo2;
        if (left_whole || right_whole)
            throw ContractError("myers_diff: non-shrinking split");
        solve(lo1, s.x_start, lo2, s.y_start);
        solve(s.x_end, hi1, s.y_end, hi2);
    }

    const Lines& a_;
    const Lines& b_;
    std::vector<std::ptrdiff_t> vf_, vb_;
    std::ptrdiff_t offset_ = 0;
    LineEdits edits_;
};

}  // namespace

LineEdits myers_diff(const Lines& a, const Lines& b) {
    return Solver(a, b).run();
}

LineEdits line_diff(const Lines& a, const Lines& b) {
    bool swap = std::lexicographical_compare(b.begin(), b.end(), a.begin(),
                                             a.end());
    if (!swap) return myers_diff(a, b);
    LineEdits e = myers_diff(b, a);
    return LineEdits{std::move(e.added), std::move(e.removed)};
}

}  // namespace mergemine::diff
