#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include "slvideo/encoder.hpp"
#include "slvideo/errors.hpp"
#include "slvideo/service.hpp"

using namespace slvideo;

namespace {

class EncoderProtocol : public ::testing::Test {
 protected:
  void SetUp() override {
    mock_ = std::make_shared<MockEncoder>(48, "mock-48");
    server_ = std::make_unique<EncoderProtocolServer>(mock_, 4);
    port_ = server_->start("127.0.0.1", 0);
    endpoint_ = "http://127.0.0.1:" + std::to_string(port_);
  }
  void TearDown() override { server_->stop(); }

  std::shared_ptr<MockEncoder> mock_;
  std::unique_ptr<EncoderProtocolServer> server_;
  int port_ = 0;
  std::string endpoint_;
};

}  // namespace

TEST_F(EncoderProtocol, RemoteMatchesMock) {
  RemoteEncoder remote(endpoint_, 48, "mock-48", 3);
  auto [model, dim] = remote.info();
  EXPECT_EQ(model, "mock-48");
  EXPECT_EQ(dim, 48u);

  std::vector<std::string> texts = {"Lobo", "Lebre", "Dúvida", "Correr", "Então"};
  auto got = remote.encode_texts(texts);  // split into batches of 3
  auto want = mock_->encode_texts(texts);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    for (std::size_t d = 0; d < 48; ++d) EXPECT_DOUBLE_EQ(got[i][d], want[i][d]);
  }

  std::vector<std::string> images = {std::string("\x89PNG\r\n\x1a\n\0\1\2", 11), "other"};
  auto gi = remote.encode_images(images);
  auto wi = mock_->encode_images(images);
  for (std::size_t d = 0; d < 48; ++d) EXPECT_DOUBLE_EQ(gi[0][d], wi[0][d]);
}

TEST_F(EncoderProtocol, DimensionMismatch) {
  RemoteEncoder remote(endpoint_, 32, "mock-48");
  try {
    encode_text(remote, "Lobo");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST_F(EncoderProtocol, ProtocolErrors) {
  httplib::Client cli(endpoint_);
  auto too_many = cli.Post("/v1/encode_text",
                           nlohmann::json{{"texts", {"a", "b", "c", "d", "e"}}}.dump(),
                           "application/json");
  ASSERT_TRUE(too_many);
  EXPECT_EQ(too_many->status, 413);
  EXPECT_EQ(nlohmann::json::parse(too_many->body)["code"], "batch_too_large");

  auto bad = cli.Post("/v1/encode_image", nlohmann::json{{"images_b64", {"***"}}}.dump(),
                      "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(nlohmann::json::parse(bad->body)["code"], "bad_image");
}

TEST(RemoteEncoder, UnreachableEndpoint) {
  // Nothing listens on the tcpmux port.
  RemoteEncoder remote("http://127.0.0.1:1", 8, "x");
  try {
    encode_text(remote, "Lobo");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EncoderUnavailable);
  }
}
