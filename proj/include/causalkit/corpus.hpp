#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace causalkit {

enum class SourceKind { Fmea, Slides };

const char* source_kind_name(SourceKind k);
SourceKind source_kind_from(const std::string& name);

// Normalized slide-box coordinates in [0, 1].
struct BBox {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool operator==(const BBox&) const = default;
};

// Where a text unit came from; resolves to exactly one table cell or slide
// box. bbox is present exactly for slide boxes.
struct Provenance {
  std::string file;
  int row = -1;            // table data row (0-based), FMEA only
  std::string column;      // original column identifier, FMEA only
  int slide = -1;          // slide index (0-based), slides only
  int box = -1;            // box index within slide as given in the export
  std::optional<BBox> bbox;

  bool operator==(const Provenance&) const = default;
};

struct TextUnit {
  std::string id;    // unique within a corpus
  std::string text;  // whitespace-normalized, non-empty
  SourceKind source_kind = SourceKind::Fmea;
  Provenance provenance;

  bool operator==(const TextUnit&) const = default;
};

// Names the three analysed table columns; each identifier is either a header
// name or a 0-based column index written in digits. The three must be
// distinct and present in the table.
struct ColumnMap {
  std::string failure_mode_column;
  std::string effect_column;
  std::string cause_column;
};

struct IngestSummary {
  int units = 0;
  int skipped_empty = 0;
};

// Parses a delimited text file (RFC-4180 style quoting; quoted cells may
// contain the delimiter, doubled quotes, and embedded newlines).
std::vector<std::vector<std::string>> read_delimited(const std::filesystem::path& file, char delimiter);

// One TextUnit per non-empty mapped cell, in row-major order
// (failure mode, effect, cause per row). Empty cells are counted, not kept.
std::vector<TextUnit> ingest_fmea(const std::filesystem::path& table_file, const ColumnMap& map,
                                  IngestSummary* summary = nullptr);

// Slide text-box JSON export: {"file": ..., "slides": [{"boxes": [{"text":
// ..., "bbox": [x0,y0,x1,y1]}, ...]}, ...]}. One TextUnit per non-empty box,
// ordered by reading order within each slide.
std::vector<TextUnit> ingest_slide_boxes(const std::filesystem::path& boxes_file,
                                         IngestSummary* summary = nullptr);

inline constexpr double kRowBandTolerance = 0.05;

// Indices of boxes in reading order: horizontal bands grouped by y0 within
// the tolerance of the band anchor, bands by anchor y0 ascending, within a
// band by x0 ascending; stable for ties.
std::vector<size_t> reading_order(const std::vector<BBox>& boxes, double tol = kRowBandTolerance);

// Corpus directory layout: manifest.json plus one "<id>.txt" per unit.
// Standoff annotations live next to them as "<id>.<annotator>.ann".
void write_corpus(const std::filesystem::path& dir, const std::vector<TextUnit>& units,
                  const IngestSummary& summary);
std::vector<TextUnit> read_corpus(const std::filesystem::path& dir);

// Annotator ids that have an annotation file for at least one unit.
std::vector<std::string> corpus_annotators(const std::filesystem::path& dir);

std::filesystem::path annotation_path(const std::filesystem::path& dir, const std::string& text_id,
                                      const std::string& annotator);

}  // namespace causalkit
