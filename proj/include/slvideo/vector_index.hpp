#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slvideo/embedding.hpp"

namespace slvideo {

struct SearchHit {
  std::string doc_id;
  double score = 0.0;  // (1 + cos) / 2, in [0, 1]
  std::size_t rank = 0;  // 1-based

  bool operator==(const SearchHit&) const = default;
};

struct IndexMeta {
  std::size_t dim = 0;
  std::size_t doc_count = 0;
};

// Maps cosine similarity to the [0, 1] score band used by every search.
inline double cosine_to_score(double cosine) { return (1.0 + cosine) / 2.0; }

// Exact cosine k-NN over one six-field document per sign.
//
// Vectors are stored as 32-bit floats, field-major. Searches run against an
// immutable snapshot; writes build a new snapshot and swap it in, so readers
// never observe a half-applied batch.
class VectorIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  explicit VectorIndex(std::size_t dim);

  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  IndexMeta meta() const;
  std::size_t dim() const { return dim_; }

  // Inserts or replaces by doc_id. Vectors must have length dim() and unit
  // norm within 1e-6. Throws DimensionMismatch, NotNormalized or
  // InvalidIdentifier; on error nothing from the batch is applied.
  void index_document(const SignEmbeddings& doc);
  void index_documents(std::span<const SignEmbeddings> docs);
  // Drops every document and inserts docs (used by full reindex).
  void replace_all(std::span<const SignEmbeddings> docs);

  bool contains(std::string_view doc_id) const;
  std::vector<std::string> doc_ids() const;

  // Exact top-min(k, doc_count) by score; ties by doc_id ascending.
  // Query is normalized internally. Empty index gives an empty list.
  std::vector<SearchHit> knn_search(const Embedding& query, Field field, std::size_t k) const;

  // Fused score = mean of the per-field scores over `fields`.
  std::vector<SearchHit> multi_field_search(const Embedding& query, std::span<const Field> fields,
                                            std::size_t k) const;

  // Stored float vector widened to double, unmodified otherwise.
  // Throws UnknownDocument.
  Embedding fetch_vectors(std::string_view doc_id, Field field) const;

  // Little-endian: magic "SLVX", u32 version, u32 dim, u64 doc_count, then per
  // doc {u32 id length, id bytes, 6 x dim f32 in field order}, then u32 CRC-32
  // of everything before it.
  void persist(const std::filesystem::path& path) const;
  // Throws CorruptIndexFile or VersionMismatch.
  static std::unique_ptr<VectorIndex> load(const std::filesystem::path& path);

  std::string serialize() const;
  static std::unique_ptr<VectorIndex> deserialize(std::string_view bytes);

 private:
  struct Snapshot {
    std::vector<std::string> ids;  // sorted ascending
    std::array<std::vector<float>, kFieldCount> vectors;  // ids.size() x dim each
    std::array<std::vector<double>, kFieldCount> norms;
  };

  std::shared_ptr<const Snapshot> snapshot() const;
  void publish(std::shared_ptr<const Snapshot> next);
  std::shared_ptr<Snapshot> merged(std::span<const SignEmbeddings> docs, bool keep_existing) const;
  void scores_for(const Snapshot& s, std::span<const double> query, Field field,
                  std::vector<double>& out) const;
  static std::vector<SearchHit> top_k(const Snapshot& s, const std::vector<double>& scores,
                                      std::size_t k);

  std::size_t dim_;
  mutable std::mutex snapshot_mu_;
  std::shared_ptr<const Snapshot> state_;
  std::mutex writer_mu_;
};

}  // namespace slvideo
