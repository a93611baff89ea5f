// Command-line front end: constant-hop expander games, covers, decompositions,
// the cut-or-embed reduction, and the aligned warm-up.
//
// Exit codes: 0 success, 1 verification failure / negative outcome, 2 usage
// error, 3 internal error.  Output is plain JSON on stdout (no color anywhere,
// so NO_COLOR is honored trivially).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hopex/clustering.hpp"
#include "hopex/errors.hpp"
#include "hopex/expander_decomp.hpp"
#include "hopex/game.hpp"
#include "hopex/krv.hpp"
#include "hopex/multigraph.hpp"
#include "hopex/warmup.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBug = 3;

hopex::MultiGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hopex::PreconditionViolated("cannot open graph file: " + path);
  return hopex::parse_edge_list(in);
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hopex::PreconditionViolated("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
  std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw hopex::PreconditionViolated("cannot write file: " + out_path);
    out << text;
  }
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& raw) {
  std::map<std::string, std::string> overrides;
  for (const auto& item : raw) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw hopex::InconsistentOverride("override must look like KEY=VALUE: " + item);
    overrides[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return overrides;
}

std::vector<int> parse_vertex_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    out.push_back(std::stoi(token));
  }
  return out;
}

int cmd_run(int n, double eps, const std::string& player_name, double alpha_remove,
            std::uint64_t seed, const std::vector<std::string>& raw_overrides,
            const std::string& out_path, const std::string& graph_out) {
  auto cfg = hopex::derive_config(n, eps, parse_overrides(raw_overrides));
  auto player = hopex::make_player(player_name, alpha_remove);
  auto result = hopex::run_game(cfg, *player, seed);
  emit(hopex::to_json(result.transcript), out_path);
  if (!graph_out.empty() && result.g_final) {
    std::ofstream out(graph_out);
    if (!out) throw hopex::PreconditionViolated("cannot write file: " + graph_out);
    hopex::write_edge_list(out, *result.g_final);
  }
  if (result.status != "completed") {
    std::cerr << "run ended with status " << result.status;
    if (!result.transcript.message.empty()) std::cerr << ": " << result.transcript.message;
    std::cerr << "\n";
    return kExitFail;
  }
  return kExitOk;
}

int cmd_verify(const std::string& transcript_path) {
  auto j = load_json(transcript_path);
  auto violation = hopex::verify_transcript(j);
  if (violation) {
    std::cerr << "transcript invalid: " << *violation << "\n";
    return kExitFail;
  }
  std::cout << "transcript ok\n";
  return kExitOk;
}

int cmd_cover(const std::string& graph_path, int h_sep, int h_diam, int load_max,
              const std::string& out_path) {
  auto g = load_graph(graph_path);
  auto cover = hopex::build_cover(g, h_sep, h_diam, load_max > 0 ? load_max : g.n());
  if (auto violation = hopex::validate_cover(g, cover))
    throw hopex::Error("constructed cover failed validation: " + *violation);
  emit(hopex::to_json(cover), out_path);
  return kExitOk;
}

int cmd_decompose_cover(const std::string& cover_path, const std::string& c_text,
                        const std::string& cprime_text, int k, long long k_prime,
                        const std::string& out_path) {
  auto cover = hopex::cover_from_json(load_json(cover_path));
  auto grouping = hopex::decompose_clustering(cover, hopex::parse_rational(c_text),
                                              hopex::parse_rational(cprime_text), k, k_prime);
  emit(hopex::to_json(grouping), out_path);
  return kExitOk;
}

int cmd_decompose_graph(const std::string& graph_path, int h, double s, double phi, double kappa,
                        std::uint64_t seed, const std::string& out_path) {
  auto g = load_graph(graph_path);
  hopex::DecompositionParams params;
  params.h = h;
  params.s = s;
  params.phi = phi;
  params.kappa = kappa;
  auto result = hopex::decompose_expander(g, params, seed);
  nlohmann::json j;
  j["budget"] = result.budget;
  j["rounds"] = result.rounds;
  j["demands_checked"] = result.demands_checked;
  j["cut_copies"] = result.cut.size();
  j["cut"] = nlohmann::json::array();
  for (auto [u, v] : result.cut) j["cut"].push_back({u, v});
  emit(j, out_path);
  return kExitOk;
}

int cmd_krv(const std::string& graph_path, double phi, int rounds, std::uint64_t seed,
            const std::string& strategy_name, const std::string& a_text, const std::string& b_text,
            const std::string& out_path) {
  auto g = load_graph(graph_path);
  hopex::BisectionStrategy strategy;
  if (strategy_name == "random") {
    strategy = hopex::random_bisection_strategy();
  } else if (strategy_name == "fixed") {
    auto a = parse_vertex_list(a_text);
    auto b = parse_vertex_list(b_text);
    if (a.empty() || b.empty())
      throw hopex::PreconditionViolated("fixed strategy needs --a and --b vertex lists");
    strategy = hopex::fixed_bisection_strategy(std::move(a), std::move(b));
  } else {
    throw hopex::PreconditionViolated("unknown strategy: " + strategy_name);
  }
  auto result = hopex::krv_reduce(g, phi, strategy, rounds, seed);
  nlohmann::json j;
  j["padded"] = result.padded;
  j["aux_vertex"] = result.aux_vertex;
  if (result.cut) {
    j["outcome"] = "cut";
    j["side"] = result.cut->side;
    j["sparsity"] = result.cut->sparsity;
    j["cut_edges"] = nlohmann::json::array();
    for (auto [u, v] : result.cut->cut_edges) j["cut_edges"].push_back({u, v});
  } else {
    j["outcome"] = "embedding";
    j["rounds"] = result.embedding->rounds;
    j["congestion"] = result.embedding->congestion;
    j["matchings"] = result.embedding->matchings.size();
    long long paths = 0;
    for (const auto& round : result.embedding->round_paths)
      paths += static_cast<long long>(round.size());
    j["paths"] = paths;
  }
  emit(j, out_path);
  return kExitOk;
}

int cmd_warmup(int n, int k, const std::string& out_path) {
  auto result = hopex::run_warmup(n, k);
  nlohmann::json j;
  j["n"] = result.n;
  j["k"] = result.k;
  j["iterations"] = result.iterations;
  j["delta_entropy"] = result.delta_entropy;
  j["final_entropy"] = result.final_entropy;
  j["entropy_cap"] = result.entropy_cap;
  emit(j, out_path);
  const double step = static_cast<double>(n) * std::log(static_cast<double>(k));
  for (double delta : result.delta_entropy)
    if (std::abs(delta - step) > 1e-6) {
      std::cerr << "warm-up gained " << delta << " instead of " << step << " in one iteration\n";
      return kExitFail;
    }
  if (std::abs(result.final_entropy - result.entropy_cap) > 1e-6) {
    std::cerr << "warm-up ended at entropy " << result.final_entropy << " instead of "
              << result.entropy_cap << "\n";
    return kExitFail;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constant-hop expander construction toolkit"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "play the full game and write a transcript");
  int run_n = 0;
  double run_eps = 0.5;
  std::string run_player = "random";
  double run_alpha = 0.0;
  std::uint64_t run_seed = 1;
  std::vector<std::string> run_overrides;
  std::string run_out, run_graph_out;
  run->add_option("--n", run_n, "vertex count")->required();
  run->add_option("--eps", run_eps, "expansion exponent in (0,1]");
  run->add_option("--player", run_player, "random | lazy | locality");
  run->add_option("--alpha-remove", run_alpha, "fraction of each matching the player drops");
  run->add_option("--seed", run_seed, "rng seed");
  run->add_option("--override", run_overrides, "KEY=VALUE parameter override (repeatable)");
  run->add_option("--out", run_out, "transcript file (default stdout)");
  run->add_option("--graph-out", run_graph_out, "write the finished graph as an edge list");

  // verify
  auto* verify = app.add_subcommand("verify", "re-check a transcript's invariants");
  std::string verify_path;
  verify->add_option("--transcript", verify_path, "transcript JSON file")->required();

  // cover
  auto* cover = app.add_subcommand("cover", "build a well-separated clustering cover");
  std::string cover_graph, cover_out;
  int cover_hsep = 1, cover_hdiam = 1, cover_load = 0;
  cover->add_option("--graph", cover_graph, "edge-list file")->required();
  cover->add_option("--hsep", cover_hsep, "separation bound")->required();
  cover->add_option("--hdiam", cover_hdiam, "diameter bound")->required();
  cover->add_option("--load-max", cover_load, "max clusterings (default: vertex count)");
  cover->add_option("--out", cover_out, "output file (default stdout)");

  // decompose (two modes)
  auto* decompose = app.add_subcommand(
      "decompose", "cover mode: split a cover into block groups; graph mode: certify-or-cut");
  std::string dec_cover, dec_graph, dec_out, dec_c = "1/324", dec_cprime = "1/2";
  int dec_k = 0, dec_h = 0;
  long long dec_kprime = 0;
  double dec_s = 1.0, dec_phi = 0.0, dec_kappa = 1.0;
  std::uint64_t dec_seed = 1;
  decompose->add_option("--cover", dec_cover, "cover JSON (cover mode)");
  decompose->add_option("--c", dec_c, "density threshold (cover mode)");
  decompose->add_option("--cprime", dec_cprime, "slack threshold (cover mode)");
  decompose->add_option("--k", dec_k, "blocks per group (cover mode)");
  decompose->add_option("--kprime", dec_kprime, "cluster-size divisor (cover mode)");
  decompose->add_option("--graph", dec_graph, "edge-list file (graph mode)");
  decompose->add_option("--hops", dec_h, "demand hop bound (graph mode)");
  decompose->add_option("--s", dec_s, "hop stretch (graph mode)");
  decompose->add_option("--phi", dec_phi, "sparsity (graph mode)");
  decompose->add_option("--kappa", dec_kappa, "congestion slack (graph mode)");
  decompose->add_option("--seed", dec_seed, "rng seed (graph mode)");
  decompose->add_option("--out", dec_out, "output file (default stdout)");

  // krv
  auto* krv = app.add_subcommand("krv", "cut-or-embed reduction to max flow");
  std::string krv_graph, krv_out, krv_strategy = "random", krv_a, krv_b;
  double krv_phi = 0.1;
  int krv_rounds = 10;
  std::uint64_t krv_seed = 1;
  krv->add_option("--graph", krv_graph, "edge-list file")->required();
  krv->add_option("--phi", krv_phi, "target sparsity")->required();
  krv->add_option("--rounds", krv_rounds, "bisection rounds");
  krv->add_option("--seed", krv_seed, "rng seed");
  krv->add_option("--strategy", krv_strategy, "random | fixed");
  krv->add_option("--a", krv_a, "comma-separated sources (fixed strategy)");
  krv->add_option("--b", krv_b, "comma-separated sinks (fixed strategy)");
  krv->add_option("--out", krv_out, "output file (default stdout)");

  // warmup
  auto* warmup = app.add_subcommand("warmup", "digit-aligned warm-up on n = k^m vertices");
  int wu_n = 0, wu_k = 0;
  std::string wu_out;
  warmup->add_option("--n", wu_n, "vertex count (a power of k)")->required();
  warmup->add_option("--k", wu_k, "digit base")->required();
  warmup->add_option("--out", wu_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run)
      return cmd_run(run_n, run_eps, run_player, run_alpha, run_seed, run_overrides, run_out,
                     run_graph_out);
    if (*verify) return cmd_verify(verify_path);
    if (*cover) return cmd_cover(cover_graph, cover_hsep, cover_hdiam, cover_load, cover_out);
    if (*decompose) {
      const bool cover_mode = !dec_cover.empty();
      const bool graph_mode = !dec_graph.empty();
      if (cover_mode == graph_mode) {
        std::cerr << "decompose needs exactly one of --cover or --graph\n";
        return kExitUsage;
      }
      if (cover_mode) {
        if (dec_k <= 0 || dec_kprime <= 0) {
          std::cerr << "cover mode needs --k and --kprime\n";
          return kExitUsage;
        }
        return cmd_decompose_cover(dec_cover, dec_c, dec_cprime, dec_k, dec_kprime, dec_out);
      }
      if (dec_h <= 0 || dec_phi <= 0.0) {
        std::cerr << "graph mode needs --hops and --phi\n";
        return kExitUsage;
      }
      return cmd_decompose_graph(dec_graph, dec_h, dec_s, dec_phi, dec_kappa, dec_seed, dec_out);
    }
    if (*krv) return cmd_krv(krv_graph, krv_phi, krv_rounds, krv_seed, krv_strategy, krv_a, krv_b,
                             krv_out);
    if (*warmup) return cmd_warmup(wu_n, wu_k, wu_out);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const hopex::InconsistentOverride& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hopex::PreconditionViolated& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const hopex::CoverInfeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitFail;
  } catch (const hopex::BudgetExhausted& e) {
    std::cerr << "budget exhausted: " << e.what() << "\n";
    return kExitFail;
  } catch (const hopex::StrategyExhausted& e) {
    std::cerr << "strategy exhausted: " << e.what() << "\n";
    return kExitFail;
  } catch (const hopex::PathBudgetExceeded& e) {
    std::cerr << "path budget exceeded: " << e.what() << "\n";
    return kExitFail;
  } catch (const hopex::PlayerRefused& e) {
    std::cerr << "player refused: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitBug;
  }
}
