#include "slvideo/embedding.hpp"

#include <cmath>

#include "slvideo/errors.hpp"

namespace slvideo {

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::DegenerateEmbedding, "non-finite embedding value");
  }
}

Embedding Embedding::zeros(std::size_t dim) { return Embedding(std::vector<double>(dim, 0.0)); }

double Embedding::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

Embedding& operator+=(Embedding& lhs, const Embedding& rhs) {
  if (lhs.dim() != rhs.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "dimension " + std::to_string(lhs.dim()) +
                                                  " vs " + std::to_string(rhs.dim()));
  }
  for (std::size_t i = 0; i < lhs.values_.size(); ++i) lhs.values_[i] += rhs.values_[i];
  return lhs;
}

Embedding operator+(Embedding lhs, const Embedding& rhs) {
  lhs += rhs;
  return lhs;
}

Embedding operator*(double c, const Embedding& v) {
  Embedding out = v;
  for (auto& x : out.values_) x *= c;
  return out;
}

std::string_view to_string(Field f) {
  switch (f) {
    case Field::Base: return "base";
    case Field::Average: return "average";
    case Field::Best: return "best";
    case Field::Summed: return "summed";
    case Field::All: return "all";
    case Field::Annotation: return "annotation";
  }
  return "all";
}

Field field_from_string(std::string_view name) {
  for (auto f : kAllFields) {
    if (to_string(f) == name) return f;
  }
  throw Error(ErrorCode::UnknownField, "unknown field '" + std::string(name) + "'");
}

namespace {

void check_frames(std::span<const Embedding> frames) {
  if (frames.empty()) throw Error(ErrorCode::EmptyInput, "no frame embeddings");
  for (const auto& f : frames) {
    if (f.dim() != frames[0].dim()) {
      throw Error(ErrorCode::DimensionMismatch, "frame embeddings have different dimensions");
    }
  }
}

}  // namespace

Embedding agg_base(std::span<const Embedding> frames) {
  check_frames(frames);
  const std::size_t n = frames.size();
  const std::size_t mid = (n - 1) / 2;
  Embedding out = frames[0];
  if (mid != 0) out += frames[mid];
  if (n - 1 != mid) out += frames[n - 1];
  return out;
}

Embedding agg_all(std::span<const Embedding> frames) {
  check_frames(frames);
  Embedding out = frames[0];
  for (std::size_t i = 1; i < frames.size(); ++i) out += frames[i];
  return out;
}

Embedding agg_average(std::span<const Embedding> frames) {
  auto sum = agg_all(frames);
  std::vector<double> v(sum.values().begin(), sum.values().end());
  const double n = static_cast<double>(frames.size());
  for (auto& x : v) x /= n;
  return Embedding(std::move(v));
}

Embedding agg_best(std::span<const Embedding> frames) {
  check_frames(frames);
  std::size_t best = 0;
  double best_norm = frames[0].norm();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    double n = frames[i].norm();
    if (n > best_norm) {
      best = i;
      best_norm = n;
    }
  }
  return frames[best];
}

Embedding agg_summed(const Embedding& base, const Embedding& average, const Embedding& best) {
  if (base.dim() != average.dim() || base.dim() != best.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "summed inputs have different dimensions");
  }
  return base + average + best;
}

Embedding normalize_unit(const Embedding& v) {
  double n = v.norm();
  if (!(n >= 1e-12)) {
    throw Error(ErrorCode::DegenerateEmbedding, "embedding norm " + std::to_string(n) +
                                                    " is too small to normalize");
  }
  std::vector<double> out(v.values().begin(), v.values().end());
  for (auto& x : out) x /= n;
  return Embedding(std::move(out));
}

const Embedding& SignEmbeddings::field(Field f) const {
  switch (f) {
    case Field::Base: return base;
    case Field::Average: return average;
    case Field::Best: return best;
    case Field::Summed: return summed;
    case Field::All: return all;
    case Field::Annotation: return annotation;
  }
  return all;
}

Embedding& SignEmbeddings::field(Field f) {
  return const_cast<Embedding&>(std::as_const(*this).field(f));
}

SignEmbeddings assemble_sign_embeddings(std::string doc_id, std::span<const Embedding> frames,
                                        const Embedding& annotation_raw) {
  auto base = agg_base(frames);
  auto average = agg_average(frames);
  auto best = agg_best(frames);
  auto summed = agg_summed(base, average, best);
  auto all = agg_all(frames);
  if (annotation_raw.dim() != base.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "annotation embedding dimension " +
                                                  std::to_string(annotation_raw.dim()) +
                                                  " vs frame dimension " +
                                                  std::to_string(base.dim()));
  }
  SignEmbeddings s;
  s.doc_id = std::move(doc_id);
  s.base = normalize_unit(base);
  s.average = normalize_unit(average);
  s.best = normalize_unit(best);
  s.summed = normalize_unit(summed);
  s.all = normalize_unit(all);
  s.annotation = normalize_unit(annotation_raw);
  return s;
}

}  // namespace slvideo
