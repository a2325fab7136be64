#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "slvideo/cli.hpp"
#include "slvideo/eaf.hpp"
#include "slvideo/encoder.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/eval_harness.hpp"
#include "slvideo/segmenter.hpp"
#include "slvideo/text.hpp"
#include "slvideo/vector_index.hpp"

namespace py = pybind11;
using namespace slvideo;

namespace {

std::vector<double> to_list(const Embedding& e) { return {e.values().begin(), e.values().end()}; }

py::dict annotation_dict(const Annotation& a) {
  py::dict d;
  d["annotation_id"] = a.annotation_id;
  d["video_id"] = a.video_id;
  d["tier_id"] = a.tier_id;
  d["tier_role"] = std::string(to_string(a.tier_role));
  d["gloss"] = a.gloss;
  d["start_ms"] = a.start_ms;
  d["end_ms"] = a.end_ms;
  d["revision"] = a.revision;
  d["origin"] = std::string(to_string(a.origin));
  return d;
}

SignEmbeddings doc_from_fields(const std::string& doc_id,
                               const std::map<std::string, std::vector<double>>& fields) {
  SignEmbeddings d;
  d.doc_id = doc_id;
  for (auto f : kAllFields) {
    auto it = fields.find(std::string(to_string(f)));
    if (it == fields.end()) {
      throw Error(ErrorCode::UnknownField, "missing field '" + std::string(to_string(f)) + "'");
    }
    d.field(f) = Embedding(it->second);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_slvideo, m) {
  m.doc() = "Sign-language video moment retrieval core";

  // Library errors surface as SlvideoError with a machine-readable .code.
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&m] { return py::object(py::exception<Error>(m, "SlvideoError")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object& cls = error_type.get_stored();
      py::object exc = cls(py::str(e.what()));
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(cls.ptr(), exc.ptr());
    }
  });

  m.def("normalize_text", &normalize_text, py::arg("text"));

  m.def(
      "parse_eaf",
      [](const std::string& eaf, const std::string& video_id, const std::string& tier_config_path) {
        auto anns = parse_eaf(eaf, video_id, TierRoleConfig::load(tier_config_path));
        py::list out;
        for (const auto& a : anns) out.append(annotation_dict(a));
        return out;
      },
      py::arg("eaf_bytes"), py::arg("video_id"), py::arg("tier_config_path"));

  m.def(
      "keyframe_timestamps",
      [](std::int64_t start, std::int64_t end, std::int64_t fps_num, std::int64_t fps_den) {
        return keyframe_timestamps(start, end, Fps{fps_num, fps_den});
      },
      py::arg("start_ms"), py::arg("end_ms"), py::arg("fps_num") = 25, py::arg("fps_den") = 1);

  m.def("f1_score", &f1_score, py::arg("precision"), py::arg("recall"));
  m.def("median", &median, py::arg("values"));

  py::class_<MockEncoder>(m, "MockEncoder")
      .def(py::init<std::size_t, std::string>(), py::arg("dim") = 512, py::arg("model_name") = "mock")
      .def_property_readonly("dim", &MockEncoder::dim)
      .def("encode_text", [](MockEncoder& e, const std::string& t) { return to_list(encode_text(e, t)); })
      .def("encode_image", [](const MockEncoder& e, const py::bytes& b) {
        return to_list(e.encode_bytes("image", std::string(b)));
      });

  py::class_<SearchHit>(m, "SearchHit")
      .def_readonly("doc_id", &SearchHit::doc_id)
      .def_readonly("score", &SearchHit::score)
      .def_readonly("rank", &SearchHit::rank)
      .def("__repr__", [](const SearchHit& h) {
        std::ostringstream s;
        s << "SearchHit(" << h.rank << ", '" << h.doc_id << "', " << h.score << ")";
        return s.str();
      });

  py::class_<VectorIndex>(m, "VectorIndex")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_property_readonly("dim", &VectorIndex::dim)
      .def("__len__", [](const VectorIndex& i) { return i.meta().doc_count; })
      .def("doc_ids", &VectorIndex::doc_ids)
      .def("index_document", [](VectorIndex& i, const std::string& doc_id,
                                const std::map<std::string, std::vector<double>>& fields) {
        i.index_document(doc_from_fields(doc_id, fields));
      }, py::arg("doc_id"), py::arg("fields"))
      .def("knn_search", [](const VectorIndex& i, const std::vector<double>& q, const std::string& field,
                            std::size_t k) {
        py::gil_scoped_release release;
        return i.knn_search(Embedding(q), field_from_string(field), k);
      }, py::arg("query"), py::arg("field"), py::arg("k") = kDefaultTopK)
      .def("multi_field_search", [](const VectorIndex& i, const std::vector<double>& q,
                                    const std::vector<std::string>& names, std::size_t k) {
        std::vector<Field> fields;
        for (const auto& n : names) fields.push_back(field_from_string(n));
        py::gil_scoped_release release;
        return i.multi_field_search(Embedding(q), fields, k);
      }, py::arg("query"), py::arg("fields"), py::arg("k") = kDefaultTopK)
      .def("persist", &VectorIndex::persist, py::arg("path"))
      .def_static("load", [](const std::filesystem::path& p) { return VectorIndex::load(p); },
                  py::arg("path"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli_dispatch(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run one slvideo CLI command; returns (exit_code, stdout, stderr).");
}
