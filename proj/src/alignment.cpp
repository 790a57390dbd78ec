#include "kws/alignment.hpp"

#include <string>

#include "kws/errors.hpp"
#include "kws/ops.hpp"

namespace kws {

PooledSequence pool_by_alignment(const Tensor& frames, const std::vector<Span>& spans,
                                 const std::vector<int>& phoneme_ids) {
  if (frames.rank() != 2) throw ShapeError("pool_by_alignment: frames must be rank-2");
  if (spans.size() != phoneme_ids.size()) {
    throw AlignmentError("pool_by_alignment: " + std::to_string(spans.size()) +
                         " spans for " + std::to_string(phoneme_ids.size()) + " phonemes");
  }
  if (spans.empty()) throw AlignmentError("pool_by_alignment: no spans");

  int cursor = 0;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const Span& s = spans[i];
    if (s.begin > cursor) {
      throw AlignmentError("pool_by_alignment: gap before span " + std::to_string(i) +
                           ", frames [" + std::to_string(cursor) + "," +
                           std::to_string(s.begin) + ") uncovered");
    }
    if (s.begin < cursor) {
      throw AlignmentError("pool_by_alignment: span " + std::to_string(i) +
                           " overlaps previous span at frame " + std::to_string(s.begin));
    }
    if (s.end <= s.begin) {
      throw AlignmentError("pool_by_alignment: span " + std::to_string(i) + " is empty");
    }
    cursor = s.end;
  }
  if (cursor != frames.rows()) {
    throw AlignmentError("pool_by_alignment: spans cover [0," + std::to_string(cursor) +
                         ") but input has " + std::to_string(frames.rows()) + " frames");
  }

  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(spans.size());
  for (const Span& s : spans) ranges.emplace_back(s.begin, s.end);
  return PooledSequence{mean_rows_by_span(frames, ranges), phoneme_ids};
}

}  // namespace kws
