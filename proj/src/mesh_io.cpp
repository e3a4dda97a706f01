#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sbpembed/error.hpp"
#include "sbpembed/mesh.hpp"

namespace sbpembed {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  fail(ErrorCode::InvalidMesh, "mesh schema: " + where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) schema_error(where, std::string("missing field '") + key + "'");
  return obj.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema_error(where, "expected a number");
  return j.get<double>();
}

Point point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) schema_error(where, "expected [x, y]");
  return {number(j[0], where), number(j[1], where)};
}

std::vector<double> coeffs(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) schema_error(where, "expected a non-empty coefficient list");
  std::vector<double> c;
  for (const json& v : j) c.push_back(number(v, where));
  return c;
}

CurvedEdge parse_edge(const json& j, const std::string& where) {
  const std::string kind = require(j, "kind", where).get<std::string>();
  CurvedEdge edge;
  if (kind == "line") {
    return CurvedEdge::line(point(require(j, "from", where), where + ".from"), point(require(j, "to", where), where + ".to"));
  } else if (kind == "circular-arc" || kind == "arc") {
    edge = CurvedEdge::arc(point(require(j, "center", where), where + ".center"),
                           number(require(j, "radius", where), where + ".radius"),
                           number(require(j, "theta0", where), where + ".theta0"),
                           number(require(j, "theta1", where), where + ".theta1"));
  } else if (kind == "polynomial") {
    edge = CurvedEdge::polynomial(coeffs(require(j, "x", where), where + ".x"), coeffs(require(j, "y", where), where + ".y"));
  } else {
    schema_error(where, "unknown edge kind '" + kind + "'");
  }
  // Stored endpoints, when given, must agree with the parametrization.
  constexpr double kEndpointTol = 1e-12;
  if (j.contains("from") && distance(point(j["from"], where + ".from"), edge.from()) > kEndpointTol)
    schema_error(where, "stored 'from' endpoint disagrees with the curve at s = 0");
  if (j.contains("to") && distance(point(j["to"], where + ".to"), edge.to()) > kEndpointTol)
    schema_error(where, "stored 'to' endpoint disagrees with the curve at s = 1");
  return edge;
}

BlockSide parse_block_side(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_string())
    schema_error(where, "expected [block, side]");
  return {j[0].get<int>(), parse_side(j[1].get<std::string>())};
}

json to_json(Point p) { return json::array({p.x, p.y}); }

json edge_json(const CurvedEdge& e) {
  json j;
  switch (e.kind()) {
    case CurvedEdge::Kind::Line:
      j["kind"] = "line";
      j["from"] = to_json(e.line_from());
      j["to"] = to_json(e.line_to());
      break;
    case CurvedEdge::Kind::Arc:
      j["kind"] = "circular-arc";
      j["center"] = to_json(e.center());
      j["radius"] = e.radius();
      j["theta0"] = e.theta0();
      j["theta1"] = e.theta1();
      j["from"] = to_json(e.from());
      j["to"] = to_json(e.to());
      break;
    case CurvedEdge::Kind::Polynomial:
      j["kind"] = "polynomial";
      j["x"] = e.coeffs_x();
      j["y"] = e.coeffs_y();
      break;
  }
  return j;
}

}  // namespace

MultiblockMesh parse_mesh(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::InvalidMesh, std::string("mesh file is not valid JSON: ") + e.what());
  }
  try {
    const int version = require(doc, "version", "root").get<int>();
    if (version != kFormatVersion) schema_error("root", "unsupported version " + std::to_string(version));

    MultiblockMesh mesh;
    const json& blocks = require(doc, "blocks", "root");
    if (!blocks.is_array() || blocks.empty()) schema_error("blocks", "expected a non-empty array");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const std::string where = "block " + std::to_string(b);
      const json& edges = require(blocks[b], "edges", where);
      if (!edges.is_array() || edges.size() != 4) schema_error(where, "expected exactly four edges (s, e, n, w)");
      Block blk;
      for (int k = 0; k < 4; ++k)
        blk.edges[k] = parse_edge(edges[k], where + " side " + std::string(side_name(kAllSides[k])));
      mesh.blocks.push_back(std::move(blk));
    }

    if (doc.contains("interfaces")) {
      const json& faces = doc["interfaces"];
      if (!faces.is_array()) schema_error("interfaces", "expected an array");
      for (std::size_t k = 0; k < faces.size(); ++k) {
        const std::string where = "interface " + std::to_string(k);
        Interface f;
        f.a = parse_block_side(require(faces[k], "a", where), where + ".a");
        f.b = parse_block_side(require(faces[k], "b", where), where + ".b");
        const std::string o = faces[k].value("orientation", std::string("aligned"));
        if (o == "aligned")
          f.orientation = Orientation::Aligned;
        else if (o == "reversed")
          f.orientation = Orientation::Reversed;
        else
          schema_error(where, "orientation must be 'aligned' or 'reversed'");
        mesh.interfaces.push_back(f);
      }
    }

    if (doc.contains("boundaries")) {
      const json& bnds = doc["boundaries"];
      if (!bnds.is_array()) schema_error("boundaries", "expected an array");
      for (std::size_t k = 0; k < bnds.size(); ++k) {
        const std::string where = "boundary " + std::to_string(k);
        const BlockSide bs{require(bnds[k], "block", where).get<int>(),
                           parse_side(require(bnds[k], "side", where).get<std::string>())};
        const std::string tag = require(bnds[k], "tag", where).get<std::string>();
        if (!mesh.boundary_tags.emplace(bs, tag).second)
          schema_error(where, "block " + std::to_string(bs.block) + " side " + std::string(side_name(bs.side)) +
                                  " is tagged twice");
      }
    }
    return mesh;
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidMesh, std::string("mesh schema: ") + e.what());
  }
}

MultiblockMesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open mesh file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  MultiblockMesh mesh = parse_mesh(buffer.str());
  const auto violations = validate_mesh(mesh);
  if (!violations.empty()) {
    std::string msg = "invalid mesh " + path.string() + ":";
    for (const auto& v : violations) msg += "\n  " + v;
    fail(ErrorCode::InvalidMesh, msg);
  }
  return mesh;
}

std::string mesh_to_json(const MultiblockMesh& mesh) {
  json doc;
  doc["version"] = kFormatVersion;
  doc["blocks"] = json::array();
  for (const Block& b : mesh.blocks) {
    json edges = json::array();
    for (const CurvedEdge& e : b.edges) edges.push_back(edge_json(e));
    doc["blocks"].push_back({{"edges", edges}});
  }
  doc["interfaces"] = json::array();
  for (const Interface& f : mesh.interfaces)
    doc["interfaces"].push_back({{"a", {f.a.block, side_name(f.a.side)}},
                                 {"b", {f.b.block, side_name(f.b.side)}},
                                 {"orientation", f.orientation == Orientation::Aligned ? "aligned" : "reversed"}});
  doc["boundaries"] = json::array();
  for (const auto& [bs, tag] : mesh.boundary_tags)
    doc["boundaries"].push_back({{"block", bs.block}, {"side", side_name(bs.side)}, {"tag", tag}});
  return doc.dump(1);
}

void save_mesh(const MultiblockMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write mesh file " + path.string());
  out << mesh_to_json(mesh) << '\n';
}

}  // namespace sbpembed
