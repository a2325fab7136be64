#include <gtest/gtest.h>

#include <thread>

#include "slvideo/annotation_store.hpp"
#include "slvideo/errors.hpp"
#include "test_support.hpp"

using namespace slvideo;
using slvideo::testkit::TempDir;

namespace {

Annotation fe(std::string id, std::string gloss, std::int64_t start, std::int64_t end) {
  Annotation a;
  a.annotation_id = std::move(id);
  a.video_id = "v1";
  a.tier_id = "GLOSA_EXP_FACIAL";
  a.tier_role = TierRole::FacialExpression;
  a.gloss = std::move(gloss);
  a.start_ms = start;
  a.end_ms = end;
  return a;
}

void seed(AnnotationStore& store) {
  Annotation tr = fe("t1", "o lobo correu muito", 0, 5000);
  tr.tier_id = "TRADUCAO";
  tr.tier_role = TierRole::Translation;
  store.add_video({"v1", "/m/v1.mp4", {25, 1}, 6000},
                  {fe("a1", "Lobo", 1000, 1400), fe("a2", "Dúvida", 2000, 2600), tr});
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST(AnnotationStore, UpsertRevisions) {
  AnnotationStore store;
  seed(store);

  auto created = store.upsert(fe("n1", "Correr", 3000, 3400));
  EXPECT_EQ(created.revision, 0u);
  EXPECT_EQ(created.origin, Origin::UserCreated);

  auto edit = created;
  edit.gloss = "Correr muito";
  auto edited = store.upsert(edit);
  EXPECT_EQ(edited.revision, 1u);
  EXPECT_EQ(edited.origin, Origin::UserEdited);
  EXPECT_EQ(store.find("v1", "n1")->gloss, "Correr muito");

  // edit still carries revision 0: stale
  EXPECT_EQ(code_of([&] { store.upsert(edit); }), ErrorCode::ConcurrentEditConflict);
}

TEST(AnnotationStore, EditingParsedAnnotation) {
  AnnotationStore store;
  seed(store);
  auto a = *store.find("v1", "a1");
  a.end_ms = 1500;
  auto out = store.upsert(a);
  EXPECT_EQ(out.revision, 1u);
  EXPECT_EQ(out.origin, Origin::UserEdited);
  EXPECT_EQ(store.find("v1", "a1")->end_ms, 1500);
}

TEST(AnnotationStore, Validation) {
  AnnotationStore store;
  seed(store);
  EXPECT_EQ(code_of([&] { store.upsert(fe("n", "X", 500, 500)); }), ErrorCode::InvalidInterval);
  EXPECT_EQ(code_of([&] { store.upsert(fe("n", "  ", 500, 600)); }), ErrorCode::EmptyGloss);
  auto other = fe("n", "X", 0, 10);
  other.video_id = "nope";
  EXPECT_EQ(code_of([&] { store.upsert(other); }), ErrorCode::UnknownVideo);
}

TEST(AnnotationStore, GeneratedIds) {
  AnnotationStore store;
  seed(store);
  auto a = store.upsert(fe("", "Muito", 100, 200));
  EXPECT_FALSE(a.annotation_id.empty());
  EXPECT_TRUE(is_valid_id_component(a.annotation_id));
  auto b = store.upsert(fe("", "Muito", 300, 400));
  EXPECT_NE(a.annotation_id, b.annotation_id);
}

TEST(AnnotationStore, RemoveHidesAnnotation) {
  AnnotationStore store;
  seed(store);
  EXPECT_EQ(code_of([&] { store.remove("v1", "a1", 7); }), ErrorCode::ConcurrentEditConflict);
  store.remove("v1", "a1", 0);
  EXPECT_FALSE(store.find("v1", "a1"));
  EXPECT_EQ(code_of([&] { store.remove("v1", "zz", 0); }), ErrorCode::UnknownAnnotation);
}

TEST(AnnotationStore, PlainTextLookup) {
  AnnotationStore store;
  seed(store);
  auto lobo = store.plain_text_lookup("lobo");
  // exact gloss match plus substring in the translation tier
  ASSERT_EQ(lobo.size(), 2u);
  auto duvida = store.plain_text_lookup("duvida");
  ASSERT_EQ(duvida.size(), 1u);
  EXPECT_EQ(duvida[0].annotation_id, "a2");
  EXPECT_TRUE(store.plain_text_lookup("lob").size() == 1u);  // translation substring only
  EXPECT_EQ(code_of([&] { store.plain_text_lookup("   "); }), ErrorCode::EmptyQuery);
}

TEST(AnnotationStore, OverlayPersistsAcrossReopen) {
  TempDir dir;
  {
    AnnotationStore store;
    seed(store);
    store.save_parsed(dir.path());
  }
  {
    auto store = AnnotationStore::open(dir.path());
    auto a = *store->find("v1", "a2");
    a.gloss = "Pensar";
    store->upsert(a);
    store->upsert(fe("n1", "Grande", 4000, 4500));
  }
  auto store = AnnotationStore::open(dir.path());
  EXPECT_EQ(store->find("v1", "a2")->gloss, "Pensar");
  EXPECT_EQ(store->find("v1", "a2")->revision, 1u);
  EXPECT_EQ(store->find("v1", "n1")->origin, Origin::UserCreated);
  EXPECT_EQ(store->annotations("v1").size(), 4u);
}

TEST(AnnotationStore, ParsedJsonIsDeterministic) {
  AnnotationStore store;
  seed(store);
  auto v = store.video("v1");
  auto anns = store.annotations("v1");
  auto json = write_parsed_json(anns, v);
  auto [v2, anns2] = read_parsed_json(json);
  EXPECT_EQ(v2, v);
  EXPECT_EQ(anns2, anns);
  EXPECT_EQ(write_parsed_json(anns2, v2), json);
}

TEST(AnnotationStore, ReadersSeeConsistentSnapshots) {
  AnnotationStore store;
  seed(store);
  std::atomic<bool> stop{false};
  std::thread reader([&] {
    while (!stop) {
      auto snap = store.snapshot();
      for (const auto& e : snap->effective) ASSERT_LT(e.annotation.start_ms, e.annotation.end_ms);
    }
  });
  auto a = *store.find("v1", "a1");
  for (int i = 0; i < 200; ++i) {
    a.end_ms = 1400 + i;
    a = store.upsert(a);
  }
  stop = true;
  reader.join();
  EXPECT_EQ(store.find("v1", "a1")->revision, 200u);
}

TEST(AnnotationStore, ExportUsesEffectiveAnnotations) {
  AnnotationStore store;
  seed(store);
  auto a = *store.find("v1", "a1");
  a.gloss = "Lebre";
  store.upsert(a);
  auto eaf = store.export_eaf("v1");
  EXPECT_NE(eaf.find("Lebre"), std::string::npos);
  EXPECT_EQ(eaf.find(">Lobo<"), std::string::npos);
  EXPECT_EQ(code_of([&] { store.export_eaf("nope"); }), ErrorCode::UnknownVideo);
}
