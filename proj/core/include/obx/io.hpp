// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "obx/evaluation.hpp"
#include "obx/target_codec.hpp"

namespace obx::io {

enum class DotaVersion {
  kV10,  // 15 classes
  kV15,  // 16 classes, adds container-crane
};

/// Category-name registry. Starts from a built-in DOTA list; unknown names
/// found while parsing are appended verbatim and reported as warnings.
class ClassTable {
 public:
  static ClassTable dota(DotaVersion version);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name_of(int id) const;
  /// Abbreviation used in result tables (Plane, BD, ..., CC); falls back to
  /// the full name for non-builtin classes.
  std::string short_name_of(int id) const;
  /// Id of a known name, or -1.
  int find(const std::string& name) const;
  /// Id of the name, appending it (and recording a warning) when unknown.
  int id_or_add(const std::string& name);
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> names_;
  int num_builtin_ = 0;
  std::vector<std::string> warnings_;
};

struct AnnotationFile {
  std::string image_id;
  std::vector<Annotation> annotations;
  /// Optional DOTA header values, kept verbatim when present.
  std::optional<std::string> imagesource;
  std::optional<std::string> gsd;
};

/// DOTA annotation format: up to two header lines (imagesource / gsd), then
/// one record per line: x1 y1 x2 y2 x3 y3 x4 y4 category difficult.
/// The image id is the file stem. Throws ParseError with the line number on
/// malformed records.
AnnotationFile parse_annotations(const std::filesystem::path& path, ClassTable& classes);

/// Deterministic writer for the same format (shortest round-trip decimals,
/// single spaces). parse(write(x)) == x.
void write_annotations(const std::filesystem::path& path, const AnnotationFile& file,
                       const ClassTable& classes);

/// Reads every "<image_id>.txt" in the directory.
std::vector<AnnotationFile> read_annotation_dir(const std::filesystem::path& dir,
                                                ClassTable& classes);

/// One detection-dump line: image_id score x1 y1 x2 y2 x3 y3 x4 y4.
std::vector<Detection> parse_detection_dump(const std::filesystem::path& path, int class_id);

/// Writes detections grouped per class as "Task1_<class>.txt" files.
void write_detection_dumps(const std::filesystem::path& dir,
                           std::span<const Detection> dets, const ClassTable& classes);

/// Reads every "Task1_*.txt" in the directory, resolving class ids by name.
std::vector<Detection> read_detection_dir(const std::filesystem::path& dir,
                                          ClassTable& classes);

/// Label grids on disk: "<image_id>.grids.json" manifest plus
/// "<image_id>.grids.bin" little-endian float32 tensors at the offsets the
/// manifest declares. Byte-stable across write/read/write.
struct GridArchive {
  std::string image_id;
  LabelGridSet grids;
  /// Class name per annotation index (what gt_index points into).
  std::vector<std::string> annotation_classes;
};

void write_grid_archive(const std::filesystem::path& dir, const GridArchive& archive);
GridArchive read_grid_archive(const std::filesystem::path& manifest_path);
std::vector<std::filesystem::path> list_grid_manifests(const std::filesystem::path& dir);

/// One SVG per image: annotation quads dashed, detection quads solid,
/// stroke color keyed by class id. Canvas defaults to the coordinate extent.
void render_svg(const std::filesystem::path& path, std::span<const Annotation> annotations,
                std::span<const Detection> detections, const ClassTable& classes,
                std::optional<ImageSize> canvas = std::nullopt);

/// Deterministic synthetic annotation corpus for fixtures and demos.
std::vector<AnnotationFile> synthesize_annotations(std::uint64_t seed, int num_images,
                                                   int max_boxes_per_image, ImageSize size,
                                                   const ClassTable& classes);

/// JSON / plain-table renderings of an evaluation report.
std::string report_to_json(const EvalReport& report, const ClassTable& classes);
std::string report_to_table(const EvalReport& report, const ClassTable& classes);

/// Worker count: OBX_THREADS when set, hardware concurrency otherwise.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) on worker_count() threads. Rethrows the
/// lowest-index exception after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Write-temp-then-rename, so concurrent invocations on disjoint outputs
/// never expose partial files.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest round-trip decimal formatting used by every text writer.
std::string format_double(double value);

}  // namespace obx::io
