#include "slvideo/vector_index.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>

#include "slvideo/annotation.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/io.hpp"

namespace slvideo {

namespace {

constexpr std::string_view kMagic = "SLVX";
constexpr double kUnitTolerance = 1e-6;

void check_doc_id(std::string_view id) {
  auto pos = id.find(kDocIdSeparator);
  if (pos == std::string_view::npos ||
      !is_valid_id_component(id.substr(0, pos)) || !is_valid_id_component(id.substr(pos + 1))) {
    throw Error(ErrorCode::InvalidIdentifier,
                "doc_id must be <video_id>_<annotation_id>: '" + std::string(id) + "'");
  }
}

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{static_cast<unsigned char>(in_[pos_ + i])} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{static_cast<unsigned char>(in_[pos_ + i])} << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error(ErrorCode::CorruptIndexFile, "index file truncated");
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32_of(std::string_view bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for large files.
  std::size_t at = 0;
  while (at < bytes.size()) {
    auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - at, 1u << 30));
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + at), n);
    at += n;
  }
  return static_cast<std::uint32_t>(crc);
}

double float_norm(std::span<const float> v) {
  double s = 0.0;
  for (float x : v) s += static_cast<double>(x) * static_cast<double>(x);
  return std::sqrt(s);
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dim) : dim_(dim), state_(std::make_shared<Snapshot>()) {
  if (dim_ == 0) throw Error(ErrorCode::ConfigInvalid, "index dim must be positive");
}

std::shared_ptr<const VectorIndex::Snapshot> VectorIndex::snapshot() const {
  std::lock_guard lock(snapshot_mu_);
  return state_;
}

void VectorIndex::publish(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(snapshot_mu_);
  state_ = std::move(next);
}

IndexMeta VectorIndex::meta() const { return {dim_, snapshot()->ids.size()}; }

std::shared_ptr<VectorIndex::Snapshot> VectorIndex::merged(std::span<const SignEmbeddings> docs,
                                                           bool keep_existing) const {
  for (const auto& d : docs) {
    check_doc_id(d.doc_id);
    for (auto f : kAllFields) {
      const auto& v = d.field(f);
      if (v.dim() != dim_) {
        throw Error(ErrorCode::DimensionMismatch,
                    d.doc_id + "." + std::string(to_string(f)) + " has dimension " +
                        std::to_string(v.dim()) + ", index expects " + std::to_string(dim_));
      }
      if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
        throw Error(ErrorCode::NotNormalized, d.doc_id + "." + std::string(to_string(f)) +
                                                  " has norm " + std::to_string(v.norm()));
      }
    }
  }

  // doc_id -> (existing row) or (new doc); later docs in the batch win.
  struct Source {
    const SignEmbeddings* doc = nullptr;
    std::size_t row = 0;
  };
  auto current = snapshot();
  std::map<std::string_view, Source> rows;
  if (keep_existing) {
    for (std::size_t r = 0; r < current->ids.size(); ++r) rows[current->ids[r]] = {nullptr, r};
  }
  for (const auto& d : docs) rows[d.doc_id] = {&d, 0};

  auto next = std::make_shared<Snapshot>();
  next->ids.reserve(rows.size());
  for (auto& v : next->vectors) v.reserve(rows.size() * dim_);
  for (auto& n : next->norms) n.reserve(rows.size());
  for (const auto& [id, src] : rows) {
    next->ids.emplace_back(id);
    for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
      auto& dst = next->vectors[fi];
      auto begin = dst.size();
      if (src.doc) {
        for (double x : src.doc->field(kAllFields[fi]).values()) dst.push_back(static_cast<float>(x));
      } else {
        const auto& from = current->vectors[fi];
        dst.insert(dst.end(), from.begin() + static_cast<std::ptrdiff_t>(src.row * dim_),
                   from.begin() + static_cast<std::ptrdiff_t>((src.row + 1) * dim_));
      }
      next->norms[fi].push_back(float_norm(std::span<const float>(dst).subspan(begin, dim_)));
    }
  }
  return next;
}

void VectorIndex::index_document(const SignEmbeddings& doc) {
  index_documents(std::span<const SignEmbeddings>(&doc, 1));
}

void VectorIndex::index_documents(std::span<const SignEmbeddings> docs) {
  std::lock_guard writer(writer_mu_);
  publish(merged(docs, true));
}

void VectorIndex::replace_all(std::span<const SignEmbeddings> docs) {
  std::lock_guard writer(writer_mu_);
  publish(merged(docs, false));
}

bool VectorIndex::contains(std::string_view doc_id) const {
  auto s = snapshot();
  return std::binary_search(s->ids.begin(), s->ids.end(), doc_id);
}

std::vector<std::string> VectorIndex::doc_ids() const { return snapshot()->ids; }

void VectorIndex::scores_for(const Snapshot& s, std::span<const double> query, Field field,
                             std::vector<double>& out) const {
  const auto fi = static_cast<std::size_t>(field);
  const auto& mat = s.vectors[fi];
  const auto& norms = s.norms[fi];
  out.resize(s.ids.size());
  for (std::size_t r = 0; r < s.ids.size(); ++r) {
    const float* row = mat.data() + r * dim_;
    double dot = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) dot += query[i] * static_cast<double>(row[i]);
    double cosine = norms[r] > 0.0 ? dot / norms[r] : 0.0;
    cosine = std::clamp(cosine, -1.0, 1.0);
    out[r] = cosine_to_score(cosine);
  }
}

std::vector<SearchHit> VectorIndex::top_k(const Snapshot& s, const std::vector<double>& scores,
                                          std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  const auto n = std::min(k, order.size());
  // Rows are in doc_id order, so row index breaks ties by doc_id.
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  std::vector<SearchHit> hits;
  hits.reserve(n);
  for (std::size_t i = 0; i < n; ++i) hits.push_back({s.ids[order[i]], scores[order[i]], i + 1});
  return hits;
}

namespace {

std::vector<double> unit_query(const Embedding& query, std::size_t dim) {
  if (query.dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "query has dimension " + std::to_string(query.dim()) +
                                                  ", index expects " + std::to_string(dim));
  }
  auto q = normalize_unit(query);
  return {q.values().begin(), q.values().end()};
}

}  // namespace

std::vector<SearchHit> VectorIndex::knn_search(const Embedding& query, Field field,
                                               std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::BadRequest, "k must be positive");
  auto q = unit_query(query, dim_);
  auto s = snapshot();
  std::vector<double> scores;
  scores_for(*s, q, field, scores);
  return top_k(*s, scores, k);
}

std::vector<SearchHit> VectorIndex::multi_field_search(const Embedding& query,
                                                       std::span<const Field> fields,
                                                       std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::BadRequest, "k must be positive");
  if (fields.empty()) throw Error(ErrorCode::BadRequest, "no fields to fuse");
  auto q = unit_query(query, dim_);
  auto s = snapshot();
  std::vector<double> fused(s->ids.size(), 0.0);
  std::vector<double> scores;
  for (auto f : fields) {
    scores_for(*s, q, f, scores);
    for (std::size_t r = 0; r < fused.size(); ++r) fused[r] += scores[r];
  }
  const double n = static_cast<double>(fields.size());
  for (auto& x : fused) x /= n;
  return top_k(*s, fused, k);
}

Embedding VectorIndex::fetch_vectors(std::string_view doc_id, Field field) const {
  auto s = snapshot();
  auto it = std::lower_bound(s->ids.begin(), s->ids.end(), doc_id);
  if (it == s->ids.end() || *it != doc_id) {
    throw Error(ErrorCode::UnknownDocument, "unknown document '" + std::string(doc_id) + "'");
  }
  auto row = static_cast<std::size_t>(it - s->ids.begin());
  const float* v = s->vectors[static_cast<std::size_t>(field)].data() + row * dim_;
  return Embedding(std::vector<double>(v, v + dim_));
}

std::string VectorIndex::serialize() const {
  auto s = snapshot();
  Writer w;
  w.bytes(kMagic);
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(dim_));
  w.u64(s->ids.size());
  for (std::size_t r = 0; r < s->ids.size(); ++r) {
    w.u32(static_cast<std::uint32_t>(s->ids[r].size()));
    w.bytes(s->ids[r]);
    for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
      const float* v = s->vectors[fi].data() + r * dim_;
      for (std::size_t i = 0; i < dim_; ++i) w.f32(v[i]);
    }
  }
  w.u32(crc32_of(w.str()));
  return std::move(w.str());
}

std::unique_ptr<VectorIndex> VectorIndex::deserialize(std::string_view bytes) {
  constexpr std::size_t kHeader = 4 + 4 + 4 + 8;
  if (bytes.size() < kHeader + 4) throw Error(ErrorCode::CorruptIndexFile, "index file truncated");
  if (bytes.substr(0, 4) != kMagic) throw Error(ErrorCode::CorruptIndexFile, "bad index magic");
  Reader header(bytes.substr(4));
  auto version = header.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::VersionMismatch, "index format version " + std::to_string(version) +
                                                ", expected " + std::to_string(kFormatVersion));
  }
  auto body = bytes.substr(0, bytes.size() - 4);
  Reader trailer(bytes.substr(bytes.size() - 4));
  if (trailer.u32() != crc32_of(body)) {
    throw Error(ErrorCode::CorruptIndexFile, "index checksum mismatch");
  }

  Reader r(body.substr(8));
  auto dim = r.u32();
  auto count = r.u64();
  if (dim == 0) throw Error(ErrorCode::CorruptIndexFile, "index dim is zero");
  if (count > body.size()) throw Error(ErrorCode::CorruptIndexFile, "implausible doc count");

  auto index = std::make_unique<VectorIndex>(dim);
  auto snap = std::make_shared<Snapshot>();
  snap->ids.reserve(count);
  for (std::uint64_t d = 0; d < count; ++d) {
    auto len = r.u32();
    std::string id(r.bytes(len));
    if (!snap->ids.empty() && !(snap->ids.back() < id)) {
      throw Error(ErrorCode::CorruptIndexFile, "doc ids out of order or duplicated");
    }
    snap->ids.push_back(std::move(id));
    for (std::size_t fi = 0; fi < kFieldCount; ++fi) {
      auto& dst = snap->vectors[fi];
      auto begin = dst.size();
      for (std::size_t i = 0; i < dim; ++i) dst.push_back(r.f32());
      snap->norms[fi].push_back(float_norm(std::span<const float>(dst).subspan(begin, dim)));
    }
  }
  if (r.remaining() != 0) throw Error(ErrorCode::CorruptIndexFile, "trailing bytes in index file");
  index->publish(std::move(snap));
  return index;
}

void VectorIndex::persist(const std::filesystem::path& path) const {
  write_file_atomic(path, serialize());
}

std::unique_ptr<VectorIndex> VectorIndex::load(const std::filesystem::path& path) {
  return deserialize(read_file(path));
}

}  // namespace slvideo
