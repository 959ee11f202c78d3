// evacsim — deadline-constrained ship evacuation simulator CLI.
//
// Subcommands:
//   run        execute an experiment recipe or a free-form scenario grid
//   gen-graph  emit a synthetic multi-deck graph file
//   validate   check a graph file and print its shape
//
// Exit codes: 0 success, 1 configuration error, 2 I/O error.
// EVACSIM_SEED, when set, overrides --seed everywhere.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evacsim/errors.hpp"
#include "evacsim/experiment.hpp"
#include "evacsim/nav_graph.hpp"
#include "evacsim/simulation.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw evacsim::IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in && !in.eof()) throw evacsim::IoError("read failed: " + path);
  return ss.str();
}

evacsim::NavGraph load_graph(const std::string& source, std::uint64_t seed) {
  if (source == "synthetic") return evacsim::generate_synthetic(evacsim::SyntheticSpec{}, seed);
  return evacsim::parse_graph(read_file(source));
}

evacsim::GridPoint parse_grid_tuple(const std::string& text) {
  evacsim::GridPoint p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    pos = comma == std::string::npos ? text.size() : comma + 1;
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw evacsim::ConfigError("grid item '" + item + "' is not key=value");
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    try {
      if (key == "pod") p.pod = std::stod(value);
      else if (key == "sod") p.sod = std::stoi(value);
      else if (key == "poe") p.poe = std::stod(value);
      else throw evacsim::ConfigError("unknown grid key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw evacsim::ConfigError("unparsable grid value '" + value + "' for " + key);
    } catch (const std::out_of_range&) {
      throw evacsim::ConfigError("grid value out of range: '" + value + "'");
    }
  }
  return p;
}

std::uint64_t env_seed_override(std::uint64_t fallback) {
  const char* env = std::getenv("EVACSIM_SEED");
  if (!env || !*env) return fallback;
  std::string s(env);
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw evacsim::ConfigError("EVACSIM_SEED is not an integer: '" + s + "'");
  }
}

struct RunArgs {
  std::string recipe;
  std::vector<std::string> grid;
  std::string graph = "synthetic";
  std::uint64_t seed = 0;
  int runs = 0;
  std::string users;
  int workers = 1;
  std::string out_dir;
  std::string config_file;
  bool static_field = false;
  bool fixed_placement = false;
};

int do_run(const RunArgs& args, const CLI::App& cmd) {
  evacsim::ParsedConfig parsed;
  if (!args.config_file.empty()) parsed = evacsim::parse_config(read_file(args.config_file));
  evacsim::ScenarioConfig& config = parsed.config;
  evacsim::ExperimentSpec& spec = parsed.spec;

  if (cmd.count("--recipe")) evacsim::apply_recipe(evacsim::parse_recipe(args.recipe), config, spec);
  if (!args.grid.empty()) {
    spec.recipe = evacsim::Recipe::custom;
    spec.grid.clear();
    for (const std::string& g : args.grid) spec.grid.push_back(parse_grid_tuple(g));
  }
  if (cmd.count("--seed")) config.master_seed = args.seed;
  if (cmd.count("--runs")) spec.runs = args.runs;
  if (cmd.count("--users")) evacsim::parse_users(args.users, spec);
  if (cmd.count("--workers")) spec.workers = args.workers;
  if (cmd.count("--out")) spec.out_dir = args.out_dir;
  if (cmd.count("--static-field")) config.static_field = true;
  if (cmd.count("--fixed-placement")) spec.fixed_placement = true;
  config.master_seed = env_seed_override(config.master_seed);

  // A bare scenario (no recipe, no grid) runs the config's own tuple.
  if (spec.grid.empty()) spec.grid.push_back({config.pod, config.sod, config.poe});

  evacsim::NavGraph graph = load_graph(args.graph, config.master_seed);
  evacsim::ExperimentOutput out = evacsim::run_experiment(graph, config, spec);
  std::cout << "recipe: " << evacsim::to_string(spec.recipe) << "  graph: " << args.graph
            << " (" << graph.node_count() << " nodes, " << graph.edge_count() << " edges)"
            << "  runs/point: " << spec.runs << "\n\n";
  std::cout << out.summary;
  if (!spec.out_dir.empty())
    std::cout << "\nwrote " << spec.out_dir << "/runs.csv and " << spec.out_dir
              << "/aggregate.csv\n";
  return 0;
}

struct GenArgs {
  int decks = 3;
  int nodes = 346;
  int passages = 600;
  int stairs = 5;
  double passage_len_min = 2.0;
  double passage_len_max = 15.0;
  double stair_len_min = 3.0;
  double stair_len_max = 6.0;
  std::uint64_t seed = 0;
  std::string out;
};

int do_gen_graph(const GenArgs& args) {
  evacsim::SyntheticSpec spec;
  spec.decks = args.decks;
  spec.nodes_total = args.nodes;
  spec.passage_edges = args.passages;
  spec.stair_edges = args.stairs;
  spec.passage_len_min = args.passage_len_min;
  spec.passage_len_max = args.passage_len_max;
  spec.stair_len_min = args.stair_len_min;
  spec.stair_len_max = args.stair_len_max;
  std::uint64_t seed = env_seed_override(args.seed);
  evacsim::NavGraph g = evacsim::generate_synthetic(spec, seed);
  std::string body = evacsim::serialize_graph(g);
  std::ofstream out(args.out, std::ios::binary);
  if (!out) throw evacsim::IoError("cannot open " + args.out + " for writing");
  out << body;
  out.flush();
  if (!out) throw evacsim::IoError("write failed: " + args.out);
  std::cout << "wrote " << args.out << ": " << g.node_count() << " nodes, " << g.edge_count()
            << " edges, exit " << g.exit_node() << "\n";
  return 0;
}

int do_validate(const std::string& path) {
  evacsim::NavGraph g = evacsim::parse_graph(read_file(path));
  int passages = 0, stairs = 0;
  for (const evacsim::EdgeRecord& e : g.edges())
    (e.kind == evacsim::EdgeKind::passage ? passages : stairs)++;
  int max_deck = 0;
  for (const evacsim::NodeRecord& n : g.nodes()) max_deck = std::max(max_deck, n.deck);
  std::cout << path << ": valid; " << g.node_count() << " nodes on " << (max_deck + 1)
            << " deck(s), " << passages << " passage(s) + " << stairs << " stair(s), exit "
            << g.exit_node() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deadline-constrained ship evacuation simulator"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment");
  run_cmd->add_option("--recipe", run_args.recipe,
                      "sweep-sod | sweep-pod | random-deployment | sweep-poe | combined | custom");
  run_cmd->add_option("--grid", run_args.grid,
                      "scenario tuple pod=..,sod=..,poe=.. (repeatable)");
  run_cmd->add_option("--graph", run_args.graph, "graph file path, or 'synthetic'");
  run_cmd->add_option("--seed", run_args.seed, "master seed");
  run_cmd->add_option("--runs", run_args.runs, "paired runs per grid point");
  run_cmd->add_option("--users", run_args.users, "all | random:<n>");
  run_cmd->add_option("--workers", run_args.workers, "worker thread count");
  run_cmd->add_option("--out", run_args.out_dir, "output directory for CSV files");
  run_cmd->add_option("--config", run_args.config_file, "key=value scenario file");
  run_cmd->add_flag("--static-field", run_args.static_field, "freeze the traversal-time field");
  run_cmd->add_flag("--fixed-placement", run_args.fixed_placement,
                    "reuse run 0's random placement for all runs");

  GenArgs gen_args;
  CLI::App* gen_cmd = app.add_subcommand("gen-graph", "emit a synthetic graph file");
  gen_cmd->add_option("--decks", gen_args.decks, "deck count");
  gen_cmd->add_option("--nodes", gen_args.nodes, "total node count");
  gen_cmd->add_option("--passages", gen_args.passages, "same-deck passage edge count");
  gen_cmd->add_option("--stairs", gen_args.stairs, "adjacent-deck stair edge count");
  gen_cmd->add_option("--passage-len-min", gen_args.passage_len_min, "passage length lo (m)");
  gen_cmd->add_option("--passage-len-max", gen_args.passage_len_max, "passage length hi (m)");
  gen_cmd->add_option("--stair-len-min", gen_args.stair_len_min, "stair length lo (m)");
  gen_cmd->add_option("--stair-len-max", gen_args.stair_len_max, "stair length hi (m)");
  gen_cmd->add_option("--seed", gen_args.seed, "generator seed");
  gen_cmd->add_option("--out", gen_args.out, "output file")->required();

  std::string validate_path;
  CLI::App* validate_cmd = app.add_subcommand("validate", "check a graph file");
  validate_cmd->add_option("graphfile", validate_path, "graph file to check")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_args, *run_cmd);
    if (gen_cmd->parsed()) return do_gen_graph(gen_args);
    if (validate_cmd->parsed()) return do_validate(validate_path);
  } catch (const evacsim::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
