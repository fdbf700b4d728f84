#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace mergemine::diff {

// A minimal line-level edit script: indices of lines removed from `a` and
// lines added from `b`, each ascending.
struct LineEdits {
    std::vector<std::size_t> removed;
    std::vector<std::size_t> added;
};

// Myers minimal diff (the linear-space divide-and-conquer variant).
// No whitespace folding, no heuristic shortcuts; the script is always a
// shortest edit script and is a pure function of the two inputs.
LineEdits myers_diff(const std::vector<std::string_view>& a,
                     const std::vector<std::string_view>& b);

// myers_diff behind a canonical orientation: the two sequences are ordered
// lexicographically before solving and the script is transposed back if they
// were swapped. This makes the result an exact mirror under argument
// exchange: added lines of line_diff(a,b) equal removed lines of
// line_diff(b,a) as multisets, including on inputs where several distinct
// minimal scripts exist.
LineEdits line_diff(const std::vector<std::string_view>& a,
                    const std::vector<std::string_view>& b);

}  // namespace mergemine::diff
