#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <thread>

#include "json.hpp"
#include "pcsi/db_file.h"
#include "pcsi/error.h"
#include "pcsi/net.h"
#include "pcsi/protocol.h"
#include "pcsi/wire.h"

#ifndef PCSI_CLI_PATH
#define PCSI_CLI_PATH "pcsi"
#endif

namespace {

using namespace pcsi;

ErrorCode code_of(std::span<const std::uint8_t> bytes) {
  try {
    decode_frame(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

ServerQuery example_query(std::uint32_t server, bool reduced) {
  PrimeField f(5);
  ServerQuery q;
  q.server = server;
  q.prime = 5;
  q.symbols = 16;
  q.u = {f.elements({1, 2, 4, 2}), f.elements({0, 2, 3, 1})};
  const PcRandomness rnd = sample_pc_randomness(16, 3);
  const auto queries = build_pc_queries(2, 4, 0, rnd);
  q.query = wire_view(queries[server]);
  if (reduced) {
    const auto table = function_table_from(f.elements({0, 1, 2, 3}), q.u[0], 2, f);
    q.keep = plan_reduction(queries, table, f, rnd.inverse_perm())[server];
  }
  return q;
}

TEST(Wire, HelloLayout) {
  const Hello h{Model::kI, 2, 4, 2, 5, 16};
  const auto bytes = encode_frame(h);
  ASSERT_EQ(bytes.size(), 4u + 1u + 20u);
  const std::vector<std::uint8_t> want = {0, 0, 0, 21, 0x01, 1, 1, 0, 0, 0, 2, 0, 0, 0, 4,
                                          0, 0, 0, 2, 0,    5, 0, 0, 0, 16};
  EXPECT_EQ(bytes, want);
  EXPECT_EQ(std::get<Hello>(decode_frame(bytes)), h);
}

TEST(Wire, QueryRoundTrip) {
  for (bool reduced : {false, true}) {
    for (std::uint32_t n : {0u, 1u}) {
      const ServerQuery q = example_query(n, reduced);
      const auto decoded = std::get<ServerQuery>(decode_frame(encode_frame(q)));
      EXPECT_EQ(decoded, q);
    }
  }
}

TEST(Wire, QueryTermLayout) {
  ServerQuery q;
  q.server = 1;
  q.prime = 5;
  q.symbols = 4;
  q.u = {FeVec{Fe(1), Fe(4)}};
  SumSpec s;
  s.level = 2;
  s.subset = {0, 2};
  s.terms = {{0, 3, 1}, {2, 1, -1}};
  q.query.server = 1;
  q.query.sums = {s};
  const auto bytes = encode_frame(q);
  const std::vector<std::uint8_t> want = {
      0, 0, 0, 54, 0x02,                         // length, tag
      0, 0, 0, 1, 0, 5, 0, 0, 0, 4,              // server, q, m
      0, 0, 0, 1, 0, 0, 0, 2, 0, 1, 0, 4,        // r=1, K=2, u
      0, 0, 0, 1,                                // one sum
      0, 0, 0, 2, 1, 0, 0, 0, 2,                 // level, keep, terms
      0, 0, 0, 0, 0, 0, 0, 3, 0,                 // a_3 with +
      0, 0, 0, 2, 0, 0, 0, 1, 1};                // c_1 with -
  EXPECT_EQ(bytes, want);
}

TEST(Wire, AnswerAndErrorRoundTrip) {
  AnswerMsg a{5, ReducedAnswer{1, {{0, Fe(4)}, {3, Fe(0)}, {9, Fe(2)}}}};
  EXPECT_EQ(std::get<AnswerMsg>(decode_frame(encode_frame(a))), a);
  ErrorMsg e{"MalformedQuery: bad"};
  EXPECT_EQ(std::get<ErrorMsg>(decode_frame(encode_frame(e))), e);
}

TEST(Wire, RejectsBadFrames) {
  const auto good = encode_frame(example_query(0, true));
  for (std::size_t cut : {0ul, 3ul, 4ul, 10ul, good.size() - 1}) {
    EXPECT_EQ(code_of(std::span(good).first(cut)), ErrorCode::kFrameTooShort) << cut;
  }
  auto trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(code_of(trailing), ErrorCode::kMalformedQuery);
  auto bad_tag = encode_frame(Hello{Model::kI, 2, 4, 2, 5, 16});
  bad_tag[4] = 0x09;
  EXPECT_EQ(code_of(bad_tag), ErrorCode::kBadTag);
  // First u element set to 7 >= q.
  auto out_of_range = good;
  out_of_range[4 + 1 + 4 + 2 + 4 + 4 + 4 + 1] = 7;
  EXPECT_EQ(code_of(out_of_range), ErrorCode::kSymbolOutOfRange);
  auto bad_answer = encode_frame(AnswerMsg{5, ReducedAnswer{0, {{0, Fe(1)}}}});
  bad_answer.back() = 5;
  EXPECT_EQ(code_of(bad_answer), ErrorCode::kSymbolOutOfRange);
}

TEST(Wire, FuzzedBytesNeverCrash) {
  std::mt19937_64 rng(77);
  const std::vector<std::vector<std::uint8_t>> seeds = {
      encode_frame(example_query(0, true)), encode_frame(Hello{Model::kII, 2, 4, 3, 5, 16}),
      encode_frame(AnswerMsg{5, ReducedAnswer{0, {{1, Fe(1)}, {2, Fe(3)}}}}),
      encode_frame(ErrorMsg{"x"})};
  int decoded = 0;
  for (int i = 0; i < 20000; ++i) {
    std::vector<std::uint8_t> bytes = seeds[rng() % seeds.size()];
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
      switch (rng() % 3) {
        case 0: bytes[rng() % bytes.size()] = static_cast<std::uint8_t>(rng()); break;
        case 1: bytes.resize(rng() % (bytes.size() + 1)); break;
        default: bytes.push_back(static_cast<std::uint8_t>(rng())); break;
      }
      if (bytes.empty()) bytes.push_back(0);
    }
    try {
      const Message m = decode_frame(bytes);
      ++decoded;
      EXPECT_EQ(decode_frame(encode_frame(m)).index(), m.index());
    } catch (const Error&) {
    }
  }
  for (int i = 0; i < 5000; ++i) {
    std::vector<std::uint8_t> bytes(rng() % 64);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    try {
      decode_frame(bytes);
    } catch (const Error&) {
    }
  }
  EXPECT_GT(decoded, 0);
}

TEST(DbFile, RoundTripAndLayout) {
  const PrimeField f(5);
  const Database db = Database::generate(f, 4, 16, 1);
  const auto bytes = encode_database(db);
  EXPECT_EQ(bytes.size(), 7u + 2 + 4 + 4 + 2 * 4 * 16);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 7), "PCSIDB1");
  EXPECT_EQ(bytes[7], 0);
  EXPECT_EQ(bytes[8], 5);
  EXPECT_EQ(bytes[20], db.data()[0].value());
  EXPECT_EQ(decode_database(bytes), db);

  const auto path = std::filesystem::temp_directory_path() / "pcsi_db_test.bin";
  write_database(path.string(), db);
  EXPECT_EQ(read_database(path.string()), db);
  std::filesystem::remove(path);

  auto bad = bytes;
  bad[20] = 0;
  bad[21] = 9;
  EXPECT_THROW(decode_database(bad), Error);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_database(bad), Error);
  bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_database(bad), Error);
}

TEST(Endpoints, Parsing) {
  const auto eps = parse_endpoints("127.0.0.1:9000,localhost:1");
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[0].host, "127.0.0.1");
  EXPECT_EQ(eps[0].port, 9000);
  EXPECT_EQ(eps[1].to_string(), "localhost:1");
  EXPECT_THROW(parse_endpoint("nohost"), Error);
  EXPECT_THROW(parse_endpoint("h:99999"), Error);
  EXPECT_THROW(parse_endpoint("h:abc"), Error);
}

class ServerFixture : public ::testing::Test {
 protected:
  PrimeField field{5};
  Database db = Database::generate(field, 4, 16, 2024);
  std::unique_ptr<FrameServer> server;
  std::thread loop;

  void SetUp() override {
    server = std::make_unique<FrameServer>(Endpoint{"127.0.0.1", 0}, database_handler(db));
    loop = std::thread([this] { server->run(); });
  }
  void TearDown() override {
    server->stop();
    loop.join();
    server.reset();
  }
  Endpoint endpoint() const { return {"127.0.0.1", server->port()}; }
};

TEST_F(ServerFixture, SequentialQueriesOnOneConnection) {
  Connection conn = Connection::connect_to(endpoint());
  const auto hello = conn.round_trip(Hello{Model::kI, 2, 4, 2, 5, 16});
  EXPECT_TRUE(std::holds_alternative<Hello>(hello));
  const ServerQuery q = example_query(0, true);
  const auto first = std::get<AnswerMsg>(conn.round_trip(q));
  const auto second = std::get<AnswerMsg>(conn.round_trip(q));
  EXPECT_EQ(first, second);
  EXPECT_EQ(first.answer, server_answer(db, q));
  EXPECT_EQ(first.answer.entries.size(), 12u);
}

TEST_F(ServerFixture, ErrorsKeepTheConnectionAlive) {
  Connection conn = Connection::connect_to(endpoint());
  ServerQuery bad = example_query(0, false);
  bad.u[0][1] = Fe(0);
  const auto err = conn.round_trip(bad);
  ASSERT_TRUE(std::holds_alternative<ErrorMsg>(err));
  EXPECT_NE(std::get<ErrorMsg>(err).reason.find("MalformedQuery"), std::string::npos);
  const auto mismatch = conn.round_trip(Hello{Model::kI, 2, 4, 2, 7, 16});
  EXPECT_TRUE(std::holds_alternative<ErrorMsg>(mismatch));
  conn.send_frame(std::vector<std::uint8_t>{0, 0, 0, 1, 0x42});
  const auto tag = decode_frame(*conn.recv_frame());
  EXPECT_TRUE(std::holds_alternative<ErrorMsg>(tag));
  const auto ok = conn.round_trip(example_query(1, false));
  EXPECT_TRUE(std::holds_alternative<AnswerMsg>(ok));
}

TEST(Transport, TcpMatchesInProcess) {
  const PrimeField f(5);
  const Database db = Database::generate(f, 4, 16, 99);
  FrameServer s0({"127.0.0.1", 0}, database_handler(db));
  FrameServer s1({"127.0.0.1", 0}, database_handler(db));
  std::thread t0([&] { s0.run(); });
  std::thread t1([&] { s1.run(); });
  const auto params = ProtocolParams::make(Model::kI, 2, 4, 2, 5);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SideInstance inst = sample_instance(params, db, seed);
    TcpTransport tcp({{"127.0.0.1", s0.port()}, {"127.0.0.1", s1.port()}});
    const RunResult remote = run_protocol(params, inst, seed, tcp);
    const RunResult local = run_protocol(params, db, inst, seed);
    EXPECT_EQ(remote.transcript, local.transcript);
  }
  TcpTransport wrong({{"127.0.0.1", s0.port()}});
  EXPECT_THROW(run_protocol(params, sample_instance(params, db, 1), 1, wrong), Error);
  s0.stop();
  s1.stop();
  t0.join();
  t1.join();
}

// Runs a shell command and captures stdout and the exit status.
std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string(PCSI_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

TEST(Cli, RunEmitsJsonTranscript) {
  const auto [code, out] =
      run_cli("run --model 1 --servers 2 --messages 4 --side 2 --prime 5 --seed 3 --json");
  EXPECT_EQ(code, 0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_EQ(j["rate"], "2/3");
  EXPECT_EQ(j["capacity"], "2/3");
  EXPECT_EQ(j["total_transmitted"], 24);
  EXPECT_EQ(j["pass"], true);
}

TEST(Cli, SeedFromEnvironment) {
  const auto a = run_cli("run --json");
  const auto b = run_cli("run --json --seed 1");
  const std::string cmd = "PCSI_SEED=7 " + std::string(PCSI_CLI_PATH) + " run --json";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
  pclose(pipe);
  EXPECT_EQ(a.second, b.second);
  EXPECT_EQ(nlohmann::json::parse(out)["seed"], 7);
}

TEST(Cli, GenDbThenRunAgainstFile) {
  const auto path = (std::filesystem::temp_directory_path() / "pcsi_cli_db.bin").string();
  EXPECT_EQ(run_cli("gen-db --messages 4 --prime 5 --symbols 16 --seed 11 --out " + path).first, 0);
  const auto from_file = run_cli("run --seed 11 --json --db " + path);
  const auto from_seed = run_cli("run --seed 11 --json");
  EXPECT_EQ(from_file.first, 0);
  EXPECT_EQ(from_file.second, from_seed.second);
  EXPECT_NE(run_cli("run --messages 5 --db " + path).first, 0);
  std::filesystem::remove(path);
}

TEST(Cli, AuditsReportPass) {
  EXPECT_EQ(run_cli("audit recoverability --messages 3 --side 1 --prime 5 --databases 2").first, 0);
  const auto [code, out] = run_cli("audit privacy --samples 2000 --threshold 0.2 --json");
  EXPECT_EQ(code, 0);
  EXPECT_EQ(nlohmann::json::parse(out)["pass"], true);
  EXPECT_EQ(run_cli("audit rate-grid --servers 2 --max-messages 3").first, 0);
  EXPECT_NE(run_cli("run --model 3").first, 0);
}

}  // namespace
