// vlens: command-line front end.
//
// Exit codes: 0 success, 1 usage error, 2 data or validation error,
// 3 I/O error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vlens/catalog.hpp"
#include "vlens/ingest.hpp"
#include "vlens/orchestrator.hpp"
#include "vlens/service.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitIo = 3;

int exit_code_for(const vlens::Error& e) {
  switch (e.code()) {
    case vlens::ErrorCode::IoError:
    case vlens::ErrorCode::PortInUse:
      return kExitIo;
    default:
      return kExitData;
  }
}

vlens::Catalog load_or_empty(const fs::path& path) {
  if (!fs::exists(path)) return {};
  return vlens::load_catalog(path);
}

void print_merged(const vlens::Catalog& catalog, const vlens::MergedResult& merged) {
  if (merged.ranked.empty()) {
    std::cout << "  (no results)\n";
    return;
  }
  std::size_t rank = 0;
  for (const auto& m : merged.ranked) {
    std::cout << std::setw(4) << ++rank << ". " << std::fixed << std::setprecision(3) << m.score
              << "  " << m.item << "  " << catalog.graph().at(m.item).name << "\n       ";
    for (const auto& p : m.provenance)
      std::cout << " [" << p.viewpoint_id << " raw=" << std::setprecision(3) << p.raw_score
                << " drift=" << p.drift << "]";
    std::cout << "\n";
  }
}

void print_translation(const vlens::TranslatedQuery& tq) {
  std::cout << "strategy: " << vlens::to_string(tq.strategy) << "\n"
            << "query:    " << tq.query.text() << "\n";
  for (const auto& a : tq.applied_rules) {
    std::cout << "  rule " << a.rule.from << " ->";
    for (const auto& t : a.rule.to) std::cout << ' ' << t;
    std::cout << " (" << vlens::to_string(a.rule.origin) << ", " << a.rule.confidence << ")\n";
  }
}

std::vector<std::string> split_ids(const std::vector<std::string>& raw) {
  std::vector<std::string> out;
  for (const auto& r : raw) {
    std::stringstream ss(r);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(part);
  }
  return out;
}

int run_session(const vlens::Catalog& catalog, const std::string& actor,
                const std::vector<std::string>& viewpoints) {
  auto snapshot = std::make_shared<const vlens::Catalog>(catalog);
  auto session = vlens::open_session("cli", snapshot, actor, viewpoints);
  std::cout << "session over";
  for (const auto& vp : session.active_viewpoints()) std::cout << ' ' << vp;
  std::cout << "\ncommands: <terms> | :transition <viewpoint> [anchor] | :go | :history | :quit\n";

  std::optional<vlens::Query> pending;
  std::string line;
  while (std::cout << "vlens> " << std::flush, std::getline(std::cin, line)) {
    try {
      std::istringstream in(line);
      std::string head;
      if (!(in >> head)) continue;
      if (head == ":quit" || head == ":q") break;
      if (head == ":history") {
        for (const auto& step : session.history())
          std::cout << "  " << step.seq << ' ' << vlens::to_string(step.kind) << ": "
                    << step.query.text() << "\n";
        continue;
      }
      if (head == ":transition") {
        std::string target, anchor;
        in >> target >> anchor;
        if (target.empty()) {
          std::cout << "usage: :transition <viewpoint> [anchor]\n";
          continue;
        }
        auto tq = session.transition(target, anchor.empty() ? std::nullopt
                                                            : std::optional<std::string>(anchor));
        print_translation(tq);
        pending = tq.query;
        std::cout << "(:go submits it)\n";
        continue;
      }
      if (head == ":go") {
        if (!pending) {
          std::cout << "nothing to submit\n";
          continue;
        }
        print_merged(catalog, session.submit_query(*pending));
        pending.reset();
        continue;
      }
      print_merged(catalog, session.submit_query(vlens::Query::from_text(line)));
    } catch (const vlens::Error& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vlens: multi-viewpoint retrieval over PPCO product data"};
  app.require_subcommand(1);

  std::string catalog_path = "vlens-catalog.xml";
  if (const char* env = std::getenv("VLENS_CATALOG"); env != nullptr && *env != '\0')
    catalog_path = env;
  app.add_option("--catalog", catalog_path, "Catalog file (default $VLENS_CATALOG)");

  std::string ingest_file;
  auto* ingest = app.add_subcommand("ingest", "Load a PPCO XML document into the catalog");
  ingest->add_option("file", ingest_file)->required();

  auto* viewpoint = app.add_subcommand("viewpoint", "Manage viewpoint specs");
  viewpoint->require_subcommand(1);
  std::string spec_file;
  auto* vp_add = viewpoint->add_subcommand("add", "Add or replace a viewpoint from a <viewpoint> XML file");
  vp_add->add_option("spec-file", spec_file)->required();

  auto* mapping = app.add_subcommand("mapping", "Manage transition mappings");
  mapping->require_subcommand(1);
  std::string mapping_file;
  auto* mapping_add = mapping->add_subcommand("add", "Add or replace a mapping from a <mapping> XML file");
  mapping_add->add_option("mapping-file", mapping_file)->required();

  std::string query_vp;
  std::vector<std::string> query_terms;
  auto* query = app.add_subcommand("query", "Evaluate a query in one viewpoint");
  query->add_option("--viewpoint", query_vp)->required();
  query->add_option("terms", query_terms)->required();

  std::string session_actor;
  std::vector<std::string> session_vps;
  auto* session = app.add_subcommand("session", "Interactive multi-viewpoint seek");
  session->add_option("--actor", session_actor)->required();
  session->add_option("--viewpoints", session_vps, "Comma-separated viewpoint ids")->required();

  std::string mine_from, mine_to;
  double mine_conf = 0.5;
  bool mine_save = false;
  auto* mine = app.add_subcommand("mine", "Mine a transition mapping between two viewpoints");
  mine->add_option("--from", mine_from)->required();
  mine->add_option("--to", mine_to)->required();
  mine->add_option("--min-conf", mine_conf)->required();
  mine->add_flag("--save", mine_save, "Store the mapping in the catalog");

  int serve_port = 8080;
  std::string serve_host = "0.0.0.0";
  auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON service");
  serve->add_option("--port", serve_port)->required();
  serve->add_option("--host", serve_host);
  serve->add_option("--catalog", catalog_path, "Catalog file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) {
      auto graph = vlens::parse_ppco(vlens::read_file(ingest_file));
      auto catalog = load_or_empty(catalog_path).with_graph(graph);
      vlens::save_catalog(catalog, catalog_path);
      std::cout << "ingested " << graph.items().size() << " items, "
                << graph.relationships().size() << " relationships into " << catalog_path << "\n";
    } else if (vp_add->parsed()) {
      auto spec = vlens::parse_viewpoint_spec(vlens::read_file(spec_file));
      auto catalog = vlens::load_catalog(catalog_path).with_viewpoint(spec);
      vlens::save_catalog(catalog, catalog_path);
      const auto& vp = catalog.viewpoint(spec.id);
      std::cout << "viewpoint " << vp.id() << ": " << vp.domain().size() << " items, "
                << vp.vocabulary().size() << " terms\n";
      for (const auto& w : vp.warnings()) std::cerr << "warning: " << w << "\n";
    } else if (mapping_add->parsed()) {
      auto m = vlens::parse_mapping(vlens::read_file(mapping_file));
      auto catalog = vlens::load_catalog(catalog_path).with_mapping(m);
      vlens::save_catalog(catalog, catalog_path);
      std::cout << "mapping " << m.source_vp() << " -> " << m.target_vp() << ": "
                << m.rules().size() << " rules\n";
    } else if (query->parsed()) {
      auto catalog = vlens::load_catalog(catalog_path);
      const auto& vp = catalog.viewpoint(query_vp);
      auto rs = vp.evaluate(vlens::Query::from_terms(std::span<const std::string>(query_terms)));
      std::size_t rank = 0;
      for (const auto& h : rs.hits)
        std::cout << std::setw(4) << ++rank << ". " << std::fixed << std::setprecision(4)
                  << h.score << "  " << h.item << "  " << catalog.graph().at(h.item).name << "\n";
      if (rs.hits.empty()) std::cout << "(no results)\n";
    } else if (session->parsed()) {
      auto catalog = vlens::load_catalog(catalog_path);
      return run_session(catalog, session_actor, split_ids(session_vps));
    } else if (mine->parsed()) {
      auto catalog = vlens::load_catalog(catalog_path);
      auto mapping =
          vlens::mine_mappings(catalog.viewpoint(mine_from), catalog.viewpoint(mine_to), mine_conf);
      for (const auto& r : mapping.rules()) {
        std::cout << r.from << " ->";
        for (const auto& t : r.to) std::cout << ' ' << t;
        std::cout << "  " << r.confidence << "\n";
      }
      std::cout << mapping.rules().size() << " rules\n";
      if (mine_save) vlens::save_catalog(catalog.with_mapping(mapping), catalog_path);
    } else if (serve->parsed()) {
      auto catalog = vlens::load_catalog(catalog_path);
      vlens::Service service(catalog, fs::path(catalog_path));
      service.bind(serve_host, serve_port);
      std::cout << "serving " << catalog_path << " on " << serve_host << ":" << serve_port
                << std::endl;
      service.listen();
    }
  } catch (const vlens::Error& e) {
    std::cerr << "vlens: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
