// pcsi: run the scheme, serve a database over TCP, generate databases and
// run the audits. Exit status is 0 iff every check passes.

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcsi/audit.h"
#include "pcsi/db_file.h"
#include "pcsi/error.h"
#include "pcsi/net.h"
#include "pcsi/protocol.h"
#include "pcsi/report_json.h"
#include "pcsi/rng.h"

namespace {

using namespace pcsi;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("PCSI_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "ignoring non-numeric PCSI_SEED\n";
    }
  }
  return 1;
}

std::vector<std::uint32_t> parse_list(const std::string& text) {
  std::vector<std::uint32_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  }
  return out;
}

struct ParamFlags {
  int model = 1;
  std::uint32_t servers = 2;
  std::uint32_t messages = 4;
  std::uint32_t side = 2;
  std::uint32_t prime = 0;  // 0: smallest prime >= max(K, 3)

  void add(CLI::App* app, bool with_servers = true) {
    app->add_option("--model", model, "1: demand outside the side set, 2: inside")
        ->check(CLI::IsMember({1, 2}));
    if (with_servers) app->add_option("--servers", servers, "number of servers N");
    app->add_option("--messages", messages, "number of messages K");
    app->add_option("--side", side, "side information size M");
    app->add_option("--prime", prime, "field size q (prime)");
  }
  Model model_enum() const { return model == 1 ? Model::kI : Model::kII; }
  std::uint32_t q() const { return prime ? prime : smallest_prime_for(messages); }
  ProtocolParams make() const {
    return ProtocolParams::make(model_enum(), servers, messages, side, q());
  }
};

int print_json(const nlohmann::ordered_json& j, bool pass) {
  std::cout << j.dump(2) << std::endl;
  return pass ? 0 : 1;
}

int cmd_run(const ParamFlags& pf, std::uint64_t seed, const std::string& transport,
            const std::string& endpoints, const std::string& db_path, int demand,
            const std::string& side_set, const std::string& coeffs, bool json) {
  const ProtocolParams params = pf.make();
  const PrimeField field = params.field();
  const Database db = db_path.empty()
                          ? Database::generate(field, params.messages, params.symbols, seed)
                          : read_database(db_path);
  PCSI_CHECK(db.field().modulus() == params.prime && db.messages() == params.messages &&
                 db.symbols() == params.symbols,
             ErrorCode::kBadParams, "database shape does not match the parameters");

  SideInstance inst;
  if (demand >= 0) {
    const auto s = parse_list(side_set);
    FeVec c;
    for (auto v : parse_list(coeffs)) c.push_back(field.element(v));
    if (c.empty()) c.assign(s.size(), Fe(1));
    inst = make_instance(params, db, static_cast<std::uint32_t>(demand), s, c);
  } else {
    inst = sample_instance(params, db, derive_seed(seed, 11));
  }

  RunResult res;
  if (transport == "tcp") {
    TcpTransport tcp(parse_endpoints(endpoints));
    res = run_protocol(params, inst, seed, tcp);
  } else {
    res = run_protocol(params, db, inst, seed);
  }
  const auto want = db.message(inst.demand);
  const bool correct = std::equal(res.demand.begin(), res.demand.end(), want.begin(), want.end());
  const bool pass = correct && res.transcript.rate_matches_capacity() && !res.transcript.fallback;

  if (json) {
    auto j = transcript_json(res.transcript);
    j["demand_correct"] = correct;
    j["pass"] = pass;
    return print_json(j, pass);
  }
  const auto& t = res.transcript;
  std::cout << "model " << static_cast<int>(params.model) << ", N=" << params.servers
            << ", K=" << params.messages << ", M=" << params.side_size << ", q=" << params.prime
            << ", m=" << params.symbols << ", seed " << seed << "\n";
  for (const auto& s : t.servers) {
    std::cout << "  server " << s.server << ": " << s.query_sums << " sums queried, "
              << s.transmitted << " symbols returned\n";
  }
  std::cout << "  downloaded " << t.total_transmitted << " symbols, rate "
            << rational_string(t.rate) << ", capacity " << rational_string(t.capacity)
            << (t.fallback ? " (reduction disabled after decode failure)" : "") << "\n"
            << "  demand " << inst.demand << " recovered " << (correct ? "correctly" : "INCORRECTLY")
            << "\n"
            << (pass ? "PASS" : "FAIL") << std::endl;
  return pass ? 0 : 1;
}

int cmd_serve(const std::string& listen, const std::string& db_path) {
  const Database db = read_database(db_path);
  FrameServer server(parse_endpoint(listen), database_handler(db));
  const Endpoint bound{parse_endpoint(listen).host, server.port()};
  std::cout << "listening on " << bound.to_string() << std::endl;
  server.run();
  return 0;
}

int cmd_gen_db(std::uint32_t messages, std::uint32_t prime, std::uint64_t symbols,
               std::uint64_t seed, const std::string& out) {
  const Database db = Database::generate(PrimeField(prime), messages, symbols, seed);
  write_database(out, db);
  std::cout << "wrote " << messages << " x " << symbols << " symbols over F_" << prime << " to "
            << out << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-server private information retrieval with private coded side information"};
  app.require_subcommand(1);
  const std::uint64_t seed_default = default_seed();

  ParamFlags run_flags;
  std::uint64_t run_seed = seed_default;
  std::string transport = "local";
  std::string endpoints;
  std::string run_db;
  int demand = -1;
  std::string side_set;
  std::string coeffs;
  bool run_json = false;
  auto* run = app.add_subcommand("run", "run one retrieval and check it");
  run_flags.add(run);
  run->add_option("--seed", run_seed, "seed (default: PCSI_SEED or 1)");
  run->add_option("--transport", transport, "local or tcp")->check(CLI::IsMember({"local", "tcp"}));
  run->add_option("--endpoints", endpoints, "comma-separated host:port, one per server");
  run->add_option("--db", run_db, "database file (default: generated from the seed)");
  run->add_option("--demand", demand, "demand index W (0-based); default: sampled");
  run->add_option("--side-set", side_set, "comma-separated side indices S (0-based)");
  run->add_option("--coeffs", coeffs, "comma-separated side coefficients (default all 1)");
  run->add_flag("--json", run_json, "print the transcript as JSON");

  auto* audit = app.add_subcommand("audit", "run an audit");
  audit->require_subcommand(1);
  std::uint64_t audit_seed = seed_default;
  bool audit_json = false;

  ParamFlags priv_flags;
  priv_flags.messages = 3;
  priv_flags.side = 1;
  std::uint32_t shape_functions = 3;
  std::uint64_t samples = 10000;
  double threshold = 0.05;
  auto* privacy = audit->add_subcommand("privacy", "exact multiplier distribution and query shape");
  priv_flags.add(privacy);
  privacy->add_option("--functions", shape_functions, "function count F for the shape audit");
  privacy->add_option("--samples", samples, "samples for the statistical part");
  privacy->add_option("--threshold", threshold, "TV threshold for the statistical part");

  ParamFlags rec_flags;
  rec_flags.messages = 3;
  rec_flags.side = 1;
  std::uint32_t db_count = 5;
  auto* recover = audit->add_subcommand("recoverability", "every (W,S,C) over seeded databases");
  rec_flags.add(recover);
  recover->add_option("--databases", db_count, "number of seeded databases");

  std::string grid_servers = "2,3";
  std::uint32_t grid_k = 5;
  std::uint64_t grid_m = 4096;
  std::uint32_t grid_seeds = 1;
  auto* grid = audit->add_subcommand("rate-grid", "measured rate against capacity per cell");
  grid->add_option("--servers", grid_servers, "comma-separated server counts");
  grid->add_option("--max-messages", grid_k, "largest K");
  grid->add_option("--max-symbols", grid_m, "largest m = N^F");
  grid->add_option("--seeds-per-cell", grid_seeds, "runs per cell");

  for (auto* sub : {privacy, recover, grid}) {
    sub->add_option("--seed", audit_seed, "seed (default: PCSI_SEED or 1)");
    sub->add_flag("--json", audit_json, "print the report as JSON");
  }

  std::string listen = "127.0.0.1:0";
  std::string serve_db;
  auto* serve = app.add_subcommand("serve", "answer queries against a database file");
  serve->add_option("--listen", listen, "host:port; port 0 picks a free one");
  serve->add_option("--db", serve_db, "database file")->required();

  std::uint32_t gen_k = 4;
  std::uint32_t gen_q = 5;
  std::uint64_t gen_m = 16;
  std::uint64_t gen_seed = seed_default;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-db", "write a random database file");
  gen->add_option("--messages", gen_k, "number of messages K");
  gen->add_option("--prime", gen_q, "field size q");
  gen->add_option("--symbols", gen_m, "symbols per message m");
  gen->add_option("--seed", gen_seed, "seed (default: PCSI_SEED or 1)");
  gen->add_option("--out", gen_out, "output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return cmd_run(run_flags, run_seed, transport, endpoints, run_db, demand, side_set, coeffs,
                     run_json);
    }
    if (*serve) return cmd_serve(listen, serve_db);
    if (*gen) return cmd_gen_db(gen_k, gen_q, gen_m, gen_seed, gen_out);
    if (*privacy) {
      const auto beta = beta_distribution_audit(priv_flags.model_enum(), priv_flags.messages,
                                                priv_flags.side, priv_flags.q(),
                                                default_omega(priv_flags.messages,
                                                              PrimeField(priv_flags.q())));
      const auto shape = query_shape_audit(priv_flags.servers, shape_functions, samples,
                                           audit_seed, threshold);
      const bool pass = beta.pass && shape.pass;
      if (audit_json) {
        nlohmann::ordered_json j;
        j["seed"] = audit_seed;
        j["beta_distribution"] = privacy_json(beta);
        j["query_shape"] = privacy_json(shape);
        j["pass"] = pass;
        return print_json(j, pass);
      }
      std::cout << "seed " << audit_seed << "\n"
                << "beta distribution: " << beta.fingerprints.size() << " (W,S) classes, "
                << beta.count << " states, max TV " << rational_string(beta.max_tv_exact) << " -> "
                << (beta.pass ? "PASS" : "FAIL") << "\n"
                << "query shape: shapes " << (shape.shapes_identical ? "identical" : "DIFFER")
                << ", max TV " << shape.max_tv << " over " << samples << " samples per f* -> "
                << (shape.pass ? "PASS" : "FAIL") << std::endl;
      for (const auto& f : shape.failures) std::cout << "  " << f << "\n";
      return pass ? 0 : 1;
    }
    if (*recover) {
      std::vector<std::uint64_t> seeds;
      for (std::uint32_t i = 0; i < db_count; ++i) seeds.push_back(derive_seed(audit_seed, i));
      const auto report = exhaustive_recoverability(rec_flags.make(), seeds);
      if (audit_json) return print_json(recoverability_json(report), report.pass);
      std::cout << "seed " << audit_seed << ": " << report.runs << " runs, " << report.failures
                << " failures, " << report.rate_mismatches << " rate mismatches, "
                << report.fallbacks << " fallbacks, capacity " << rational_string(report.capacity)
                << " -> " << (report.pass ? "PASS" : "FAIL") << std::endl;
      for (const auto& n : report.notes) std::cout << "  " << n << "\n";
      return report.pass ? 0 : 1;
    }
    if (*grid) {
      const auto cells = rate_grid(default_rate_grid(parse_list(grid_servers), grid_k, grid_m),
                                   audit_seed, grid_seeds);
      const auto j = rate_grid_json(cells);
      if (audit_json) return print_json(j, j["pass"].get<bool>());
      std::cout << "seed " << audit_seed << "\n";
      for (const auto& c : cells) {
        std::cout << "  model " << static_cast<int>(c.params.model) << " N=" << c.params.servers
                  << " K=" << c.params.messages << " M=" << c.params.side_size
                  << " m=" << c.params.symbols << ": rate " << rational_string(c.measured)
                  << " capacity " << rational_string(c.capacity) << (c.ok() ? "" : "  FAIL")
                  << (c.error.empty() ? "" : " (" + c.error + ")") << "\n";
      }
      const bool pass = j["pass"].get<bool>();
      std::cout << (pass ? "PASS" : "FAIL") << std::endl;
      return pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
  return 1;
}
