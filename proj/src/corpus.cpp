#include "causalkit/corpus.hpp"

#include <algorithm>
#include <set>

#include "causalkit/errors.hpp"
#include "causalkit/io.hpp"
#include "causalkit/text.hpp"

namespace causalkit {

const char* source_kind_name(SourceKind k) { return k == SourceKind::Fmea ? "fmea" : "slides"; }

SourceKind source_kind_from(const std::string& name) {
  if (name == "fmea") return SourceKind::Fmea;
  if (name == "slides") return SourceKind::Slides;
  fail(ErrorKind::Parse, "unknown source kind: '" + name + "'");
}

std::vector<std::vector<std::string>> read_delimited(const std::filesystem::path& file, char delimiter) {
  const std::string raw = read_text_file(file);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  size_t i = 0;
  auto end_cell = [&]() {
    row.push_back(cell);
    cell.clear();
    cell_started = false;
  };
  auto end_row = [&]() {
    end_cell();
    rows.push_back(row);
    row.clear();
  };
  while (i < raw.size()) {
    const char c = raw[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < raw.size() && raw[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && !cell_started) {
      in_quotes = true;
      cell_started = true;
    } else if (c == delimiter) {
      end_cell();
    } else if (c == '\n') {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      end_row();
    } else {
      cell.push_back(c);
      cell_started = true;
    }
    ++i;
  }
  if (in_quotes) fail(ErrorKind::Parse, file.string() + ": unterminated quoted cell");
  if (!cell.empty() || !row.empty()) end_row();
  return rows;
}

namespace {

std::string sanitize_id(const std::string& s) {
  std::string out;
  for (const char c : s) {
    const bool ok = (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? std::string("x") : out;
}

int resolve_column(const std::vector<std::string>& header, const std::string& ident,
                   const std::string& role, const std::filesystem::path& file) {
  if (!ident.empty() && std::all_of(ident.begin(), ident.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const int idx = std::stoi(ident);
    require(idx < static_cast<int>(header.size()), ErrorKind::Config,
            file.string() + ": " + role + " column index " + ident + " out of range (table has " +
                std::to_string(header.size()) + " columns)");
    return idx;
  }
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == ident) return static_cast<int>(i);
  fail(ErrorKind::Config, file.string() + ": " + role + " column '" + ident + "' not found in header");
}

}  // namespace

std::vector<TextUnit> ingest_fmea(const std::filesystem::path& table_file, const ColumnMap& map,
                                  IngestSummary* summary) {
  const char delim = table_file.extension() == ".tsv" ? '\t' : ',';
  const auto rows = read_delimited(table_file, delim);
  require(!rows.empty(), ErrorKind::Parse, table_file.string() + ": empty table (no header row)");
  const auto& header = rows[0];

  struct Col {
    const char* role;
    std::string ident;
    int idx;
  };
  std::vector<Col> cols = {{"failure_mode", map.failure_mode_column, 0},
                           {"effect", map.effect_column, 0},
                           {"cause", map.cause_column, 0}};
  for (auto& c : cols) c.idx = resolve_column(header, c.ident, c.role, table_file);
  require(cols[0].idx != cols[1].idx && cols[0].idx != cols[2].idx && cols[1].idx != cols[2].idx,
          ErrorKind::Config, table_file.string() + ": mapped columns must be distinct");

  const std::string stem = sanitize_id(table_file.stem().string());
  std::vector<TextUnit> units;
  IngestSummary local;
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    for (const auto& c : cols) {
      std::string cell = c.idx < static_cast<int>(row.size()) ? row[static_cast<size_t>(c.idx)] : "";
      std::string text = normalize_whitespace(cell);
      if (text.empty()) {
        ++local.skipped_empty;
        continue;
      }
      TextUnit u;
      u.id = stem + "-r" + std::to_string(r - 1) + "-" + c.role;
      u.text = std::move(text);
      u.source_kind = SourceKind::Fmea;
      u.provenance.file = table_file.string();
      u.provenance.row = static_cast<int>(r - 1);
      u.provenance.column = header[static_cast<size_t>(c.idx)];
      units.push_back(std::move(u));
      ++local.units;
    }
  }
  if (summary) *summary = local;
  return units;
}

std::vector<size_t> reading_order(const std::vector<BBox>& boxes, double tol) {
  std::vector<size_t> order(boxes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  // sort by y0, stable so equal boxes keep input order
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return boxes[a].y0 < boxes[b].y0; });
  std::vector<size_t> result;
  result.reserve(order.size());
  size_t i = 0;
  while (i < order.size()) {
    const double anchor = boxes[order[i]].y0;
    size_t j = i + 1;
    while (j < order.size() && boxes[order[j]].y0 <= anchor + tol) ++j;
    std::vector<size_t> band(order.begin() + static_cast<long>(i), order.begin() + static_cast<long>(j));
    std::stable_sort(band.begin(), band.end(),
                     [&](size_t a, size_t b) { return boxes[a].x0 < boxes[b].x0; });
    result.insert(result.end(), band.begin(), band.end());
    i = j;
  }
  return result;
}

std::vector<TextUnit> ingest_slide_boxes(const std::filesystem::path& boxes_file, IngestSummary* summary) {
  const Json doc = read_json_file(boxes_file);
  require(doc.is_object() && doc.contains("slides") && doc["slides"].is_array(), ErrorKind::Parse,
          boxes_file.string() + ": expected an object with a \"slides\" array");
  const std::string stem = sanitize_id(boxes_file.stem().string());
  const std::string file_name =
      doc.contains("file") && doc["file"].is_string() ? doc["file"].get<std::string>() : boxes_file.string();

  std::vector<TextUnit> units;
  IngestSummary local;
  int slide_idx = 0;
  for (const auto& slide : doc["slides"]) {
    require(slide.is_object() && slide.contains("boxes") && slide["boxes"].is_array(), ErrorKind::Parse,
            boxes_file.string() + ": slide " + std::to_string(slide_idx) + " lacks a \"boxes\" array");
    const auto& boxes_json = slide["boxes"];
    std::vector<BBox> bboxes;
    std::vector<std::string> texts;
    int box_idx = 0;
    for (const auto& box : boxes_json) {
      const std::string where =
          boxes_file.string() + ": slide " + std::to_string(slide_idx) + " box " + std::to_string(box_idx);
      require(box.is_object() && box.contains("text"), ErrorKind::Validation, where + ": missing \"text\"");
      require(box.contains("bbox") && box["bbox"].is_array() && box["bbox"].size() == 4,
              ErrorKind::Validation, where + ": box coordinates missing or not [x0,y0,x1,y1]");
      BBox bb;
      double* coord[4] = {&bb.x0, &bb.y0, &bb.x1, &bb.y1};
      for (int k = 0; k < 4; ++k) {
        require(box["bbox"][static_cast<size_t>(k)].is_number(), ErrorKind::Validation,
                where + ": box coordinates must be numbers");
        *coord[k] = box["bbox"][static_cast<size_t>(k)].get<double>();
        require(*coord[k] >= 0.0 && *coord[k] <= 1.0, ErrorKind::Validation,
                where + ": coordinates must lie in [0,1]");
      }
      bboxes.push_back(bb);
      texts.push_back(box["text"].is_string() ? box["text"].get<std::string>() : std::string());
      ++box_idx;
    }
    for (const size_t b : reading_order(bboxes)) {
      std::string text = normalize_whitespace(texts[b]);
      if (text.empty()) {
        ++local.skipped_empty;
        continue;
      }
      TextUnit u;
      u.id = stem + "-s" + std::to_string(slide_idx) + "-b" + std::to_string(b);
      u.text = std::move(text);
      u.source_kind = SourceKind::Slides;
      u.provenance.file = file_name;
      u.provenance.slide = slide_idx;
      u.provenance.box = static_cast<int>(b);
      u.provenance.bbox = bboxes[b];
      units.push_back(std::move(u));
      ++local.units;
    }
    ++slide_idx;
  }
  if (summary) *summary = local;
  return units;
}

namespace {

Json provenance_json(const Provenance& p, SourceKind kind) {
  Json j;
  j["file"] = p.file;
  if (kind == SourceKind::Fmea) {
    j["row"] = p.row;
    j["column"] = p.column;
  } else {
    j["slide"] = p.slide;
    j["box"] = p.box;
    const BBox& bb = p.bbox.value();
    j["bbox"] = {bb.x0, bb.y0, bb.x1, bb.y1};
  }
  return j;
}

Provenance provenance_from_json(const Json& j, SourceKind kind) {
  Provenance p;
  p.file = j.value("file", std::string());
  if (kind == SourceKind::Fmea) {
    p.row = j.value("row", -1);
    p.column = j.value("column", std::string());
  } else {
    p.slide = j.value("slide", -1);
    p.box = j.value("box", -1);
    if (j.contains("bbox") && j["bbox"].is_array() && j["bbox"].size() == 4) {
      BBox bb{j["bbox"][0].get<double>(), j["bbox"][1].get<double>(), j["bbox"][2].get<double>(),
              j["bbox"][3].get<double>()};
      p.bbox = bb;
    }
  }
  return p;
}

}  // namespace

void write_corpus(const std::filesystem::path& dir, const std::vector<TextUnit>& units,
                  const IngestSummary& summary) {
  std::set<std::string> seen;
  for (const TextUnit& u : units) {
    require(seen.insert(u.id).second, ErrorKind::Integrity, "duplicate text id in corpus: " + u.id);
    require(!u.text.empty(), ErrorKind::Integrity, "empty text unit: " + u.id);
    require((u.source_kind == SourceKind::Slides) == u.provenance.bbox.has_value(), ErrorKind::Integrity,
            "bbox must be present exactly for slide boxes: " + u.id);
  }
  ensure_dir(dir);
  Json manifest;
  manifest["schema"] = "causalkit-corpus-v1";
  manifest["summary"] = {{"units", summary.units}, {"skipped_empty", summary.skipped_empty}};
  Json list = Json::array();
  for (const TextUnit& u : units) {
    Json entry;
    entry["id"] = u.id;
    entry["source_kind"] = source_kind_name(u.source_kind);
    entry["provenance"] = provenance_json(u.provenance, u.source_kind);
    list.push_back(entry);
    write_text_file(dir / (u.id + ".txt"), u.text + "\n");
  }
  manifest["units"] = list;
  write_json_file(dir / "manifest.json", manifest);
}

std::vector<TextUnit> read_corpus(const std::filesystem::path& dir) {
  const Json manifest = read_json_file(dir / "manifest.json");
  require(manifest.value("schema", std::string()) == "causalkit-corpus-v1", ErrorKind::Parse,
          dir.string() + "/manifest.json: unsupported schema");
  std::vector<TextUnit> units;
  for (const auto& entry : manifest["units"]) {
    TextUnit u;
    u.id = entry.at("id").get<std::string>();
    u.source_kind = source_kind_from(entry.at("source_kind").get<std::string>());
    u.provenance = provenance_from_json(entry.at("provenance"), u.source_kind);
    std::string raw = read_text_file(dir / (u.id + ".txt"));
    if (!raw.empty() && raw.back() == '\n') raw.pop_back();
    u.text = std::move(raw);
    units.push_back(std::move(u));
  }
  return units;
}

std::vector<std::string> corpus_annotators(const std::filesystem::path& dir) {
  std::set<std::string> ids;
  for (const TextUnit& u : read_corpus(dir)) ids.insert(u.id);
  std::set<std::string> annotators;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".ann") continue;
    const std::string stem = e.path().stem().string();  // "<id>.<annotator>"
    const size_t dot = stem.rfind('.');
    if (dot == std::string::npos) continue;
    if (ids.count(stem.substr(0, dot))) annotators.insert(stem.substr(dot + 1));
  }
  return {annotators.begin(), annotators.end()};
}

std::filesystem::path annotation_path(const std::filesystem::path& dir, const std::string& text_id,
                                      const std::string& annotator) {
  return dir / (text_id + "." + annotator + ".ann");
}

}  // namespace causalkit
