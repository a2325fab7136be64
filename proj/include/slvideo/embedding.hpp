#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace slvideo {

// Fixed-dimension real vector. Values are always finite.
class Embedding {
 public:
  Embedding() = default;
  // Throws DegenerateEmbedding on non-finite values.
  explicit Embedding(std::vector<double> values);
  static Embedding zeros(std::size_t dim);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  bool operator==(const Embedding&) const = default;

 private:
  friend Embedding& operator+=(Embedding& lhs, const Embedding& rhs);
  friend Embedding operator*(double c, const Embedding& v);
  std::vector<double> values_;
};

// Throw DimensionMismatch when dims differ.
Embedding& operator+=(Embedding& lhs, const Embedding& rhs);
Embedding operator+(Embedding lhs, const Embedding& rhs);
Embedding operator*(double c, const Embedding& v);

// The six stored embeddings of one sign, in storage order.
enum class Field { Base, Average, Best, Summed, All, Annotation };
inline constexpr std::array<Field, 6> kAllFields = {Field::Base,   Field::Average, Field::Best,
                                                    Field::Summed, Field::All,
                                                    Field::Annotation};
inline constexpr std::size_t kFieldCount = kAllFields.size();

std::string_view to_string(Field f);
// Throws UnknownField.
Field field_from_string(std::string_view name);

// Aggregations over raw per-frame vectors. All throw EmptyInput on an empty
// list and DimensionMismatch on ragged input.

// Sum of the first, middle (index (n-1)/2) and last frame, duplicates collapsed.
Embedding agg_base(std::span<const Embedding> frames);
Embedding agg_average(std::span<const Embedding> frames);
// Frame with the largest L2 norm; lowest index wins ties.
Embedding agg_best(std::span<const Embedding> frames);
Embedding agg_summed(const Embedding& base, const Embedding& average, const Embedding& best);
Embedding agg_all(std::span<const Embedding> frames);

// v / |v|. Throws DegenerateEmbedding when |v| < 1e-12.
Embedding normalize_unit(const Embedding& v);

struct SignEmbeddings {
  std::string doc_id;
  Embedding base;
  Embedding average;
  Embedding best;
  Embedding summed;
  Embedding all;
  Embedding annotation;

  const Embedding& field(Field f) const;
  Embedding& field(Field f);
  bool operator==(const SignEmbeddings&) const = default;
};

// Computes all six aggregations from the same raw frame vectors and the raw
// gloss vector, unit-normalizing each for storage.
SignEmbeddings assemble_sign_embeddings(std::string doc_id, std::span<const Embedding> frames,
                                        const Embedding& annotation_raw);

}  // namespace slvideo
