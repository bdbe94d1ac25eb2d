// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line surface over the oriented-box toolkit: overlap queries,
// label-grid encoding/decoding, rotated NMS, matching statistics, rotated-IoU
// evaluation, and SVG rendering of quad geometry. Exit codes: 0 success,
// 1 usage error, 2 data error.

#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "obx/io.hpp"
#include "obx/matching.hpp"

namespace {

using namespace obx;

constexpr double kDegToRad = kPi / 180.0;

struct BoxArg {
  std::string text;
  bool quad = false;
};

std::vector<double> parse_reals(const std::string& text, std::size_t expected,
                                const char* what) {
  std::istringstream in(text);
  std::vector<double> values;
  double v = 0.0;
  while (in >> v) values.push_back(v);
  if (!in.eof() || values.size() != expected) {
    throw InputError(std::string(what) + ": expected " + std::to_string(expected) +
                     " numbers, got '" + text + "'");
  }
  return values;
}

OrientedBox parse_box_literal(const std::string& text, bool as_quad) {
  if (as_quad) {
    const std::vector<double> v = parse_reals(text, 8, "quad literal");
    return quad_to_box(Quad::from_points(
        {{{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}}}));
  }
  const std::vector<double> v = parse_reals(text, 5, "box literal");
  return OrientedBox::make(v[0], v[1], v[2], v[3], v[4] * kDegToRad);
}

ImageSize parse_size(const std::string& text) {
  int w = 0, h = 0;
  char sep = 0;
  std::istringstream in(text);
  if (!(in >> w >> sep >> h) || (sep != 'x' && sep != 'X') || w < 1 || h < 1 ||
      !(in >> std::ws).eof()) {
    throw InputError("size: expected WxH, got '" + text + "'");
  }
  return ImageSize{w, h};
}

io::DotaVersion parse_version(const std::string& text) {
  if (text == "v1.0") return io::DotaVersion::kV10;
  if (text == "v1.5") return io::DotaVersion::kV15;
  throw InputError("classes: expected v1.0 or v1.5, got '" + text + "'");
}

OverlapKind parse_kind(const std::string& text) {
  if (text == "iou") return OverlapKind::kStandardIou;
  if (text == "liiou") return OverlapKind::kLengthIndependentIou;
  throw InputError("kind: expected iou or liiou, got '" + text + "'");
}

void print_warnings(const io::ClassTable& classes) {
  for (const std::string& w : classes.warnings()) {
    std::cerr << "warning: " << w << "\n";
  }
}

// ---------------------------------------------------------------------------

struct IouCmd {
  std::string a, b;
  std::string kind = "iou";
  bool quad = false;

  int run() const {
    const OrientedBox box_a = parse_box_literal(a, quad);
    const OrientedBox box_b = parse_box_literal(b, quad);
    const double value = overlap(box_a, box_b, parse_kind(kind));
    std::printf("%.12f\n", value);
    return 0;
  }
};

struct EncodeCmd {
  std::string ann_dir, out_dir, size_text, version = "v1.0";
  CodecConfig codec;
  ApeConfig ape;

  int run() const {
    codec.validate();
    const ImageSize size = parse_size(size_text);
    io::ClassTable classes = io::ClassTable::dota(parse_version(version));
    const std::vector<io::AnnotationFile> files = io::read_annotation_dir(ann_dir, classes);
    print_warnings(classes);

    io::parallel_for(files.size(), [&](std::size_t i) {
      const io::AnnotationFile& file = files[i];
      std::vector<LabeledBox> boxes;
      io::GridArchive archive;
      archive.image_id = file.image_id;
      for (const Annotation& ann : file.annotations) {
        boxes.push_back(LabeledBox{quad_to_box(ann.quad), ann.class_id});
        archive.annotation_classes.push_back(classes.name_of(ann.class_id));
      }
      archive.grids = encode_rpn_grids(boxes, size, codec, ape);
      io::write_grid_archive(out_dir, archive);
    });
    std::cerr << "encoded " << files.size() << " images\n";
    return 0;
  }
};

struct DecodeCmd {
  std::string grids_dir, out_dir;
  double score_threshold = 0.5;
  CodecConfig codec;
  ApeConfig ape;
  std::string version = "v1.0";

  int run() const {
    codec.validate();
    io::ClassTable classes = io::ClassTable::dota(parse_version(version));
    const std::vector<std::filesystem::path> manifests = io::list_grid_manifests(grids_dir);
    if (manifests.empty()) {
      throw InputError("decode: no *.grids.json manifests under " + grids_dir);
    }

    // Decoded with class names; the table resolves ids serially afterwards
    // (it is not safe for concurrent insertion).
    struct NamedDet {
      std::string image_id;
      std::string cls;
      double score;
      Quad quad;
    };
    std::vector<std::vector<NamedDet>> per_image(manifests.size());
    io::parallel_for(manifests.size(), [&](std::size_t i) {
      const io::GridArchive archive = io::read_grid_archive(manifests[i]);
      const std::vector<DecodedProposal> proposals =
          decode_rpn_grids(to_predictions(archive.grids), score_threshold, codec, ape);
      for (const DecodedProposal& p : proposals) {
        const LabelLevel* level = archive.grids.find_level(p.level);
        std::string cls_name = "proposal";
        if (level != nullptr) {
          const std::int32_t gt = level->gt_index[level->cell(p.x, p.y)];
          if (gt >= 0 &&
              gt < static_cast<std::int32_t>(archive.annotation_classes.size())) {
            cls_name = archive.annotation_classes[static_cast<std::size_t>(gt)];
          }
        }
        per_image[i].push_back(
            NamedDet{archive.image_id, std::move(cls_name), p.score, box_to_quad(p.box)});
      }
    });

    std::vector<Detection> all;
    for (const std::vector<NamedDet>& group : per_image) {
      for (const NamedDet& nd : group) {
        all.push_back(Detection{nd.image_id, classes.id_or_add(nd.cls), nd.score, nd.quad});
      }
    }
    io::write_detection_dumps(out_dir, all, classes);
    std::cerr << "decoded " << all.size() << " proposals from " << manifests.size()
              << " images\n";
    return 0;
  }
};

struct NmsCmd {
  std::string in_dir, out_dir;
  double threshold = 0.5;

  int run() const {
    io::ClassTable classes = io::ClassTable::dota(io::DotaVersion::kV15);
    const std::vector<Detection> dets = io::read_detection_dir(in_dir, classes);
    const std::vector<Detection> kept = rotated_nms(dets, threshold);
    io::write_detection_dumps(out_dir, kept, classes);
    std::cerr << "kept " << kept.size() << " of " << dets.size() << " detections\n";
    return 0;
  }
};

struct MatchStatsCmd {
  std::string ann_dir, proposals_path;
  std::string kind = "liiou";
  double threshold = 0.5;
  std::string version = "v1.0";

  int run() const {
    io::ClassTable classes = io::ClassTable::dota(parse_version(version));
    const std::vector<io::AnnotationFile> files = io::read_annotation_dir(ann_dir, classes);
    const std::vector<Detection> proposals = io::parse_detection_dump(proposals_path, 0);
    const OverlapKind overlap_kind = parse_kind(kind);

    std::map<std::string, std::vector<OrientedBox>> proposals_by_image;
    for (const Detection& p : proposals) {
      proposals_by_image[p.image_id].push_back(quad_to_box(p.quad));
    }

    std::printf("%-16s %5s %-20s %5s %9s\n", "image", "gt", "class", "diff", "positives");
    int total_gts = 0, covered = 0;
    for (const io::AnnotationFile& file : files) {
      if (file.annotations.empty()) continue;
      std::vector<OrientedBox> gts;
      for (const Annotation& a : file.annotations) gts.push_back(quad_to_box(a.quad));
      static const std::vector<OrientedBox> kNoProposals;
      const auto it = proposals_by_image.find(file.image_id);
      const std::vector<OrientedBox>& img_proposals =
          it == proposals_by_image.end() ? kNoProposals : it->second;
      const std::vector<int> counts =
          coverage_stats(img_proposals, gts, overlap_kind, threshold);
      for (std::size_t g = 0; g < gts.size(); ++g) {
        const Annotation& a = file.annotations[g];
        std::printf("%-16s %5zu %-20s %5d %9d\n", file.image_id.c_str(), g,
                    classes.name_of(a.class_id).c_str(), a.difficult ? 1 : 0, counts[g]);
        ++total_gts;
        if (counts[g] > 0) ++covered;
      }
    }
    std::printf("gts with >= 1 positive: %d / %d (%s, threshold %s)\n", covered, total_gts,
                kind.c_str(), io::format_double(threshold).c_str());
    return 0;
  }
};

struct EvalCmd {
  std::string dets_dir, ann_dir;
  std::string metric = "voc07";
  std::string overlap_method = "rect";
  double iou = 0.5;
  std::string version = "v1.0";
  std::string json_path;

  int run() const {
    io::ClassTable classes = io::ClassTable::dota(parse_version(version));
    const std::vector<io::AnnotationFile> files = io::read_annotation_dir(ann_dir, classes);
    std::vector<Annotation> annotations;
    for (const io::AnnotationFile& f : files) {
      annotations.insert(annotations.end(), f.annotations.begin(), f.annotations.end());
    }
    const std::vector<Detection> dets = io::read_detection_dir(dets_dir, classes);
    print_warnings(classes);

    EvalConfig cfg;
    cfg.iou_threshold = iou;
    if (metric == "voc07") {
      cfg.metric = ApMetric::kVoc07ElevenPoint;
    } else if (metric == "cont") {
      cfg.metric = ApMetric::kContinuous;
    } else {
      throw InputError("metric: expected voc07 or cont, got '" + metric + "'");
    }
    if (overlap_method == "rect") {
      cfg.overlap = QuadOverlapMethod::kMinAreaRect;
    } else if (overlap_method == "quad") {
      cfg.overlap = QuadOverlapMethod::kExactPolygon;
    } else {
      throw InputError("overlap: expected rect or quad, got '" + overlap_method + "'");
    }

    const EvalReport report = evaluate(dets, annotations, cfg);
    std::fputs(io::report_to_table(report, classes).c_str(), stdout);
    if (!json_path.empty()) {
      io::atomic_write_file(json_path, io::report_to_json(report, classes));
    }
    return 0;
  }
};

struct RenderSvgCmd {
  std::string ann_dir, dets_dir, out_dir;
  std::string size_text;
  std::string version = "v1.0";

  int run() const {
    if (ann_dir.empty() && dets_dir.empty()) {
      throw InputError("render-svg: need --ann and/or --dets");
    }
    io::ClassTable classes = io::ClassTable::dota(parse_version(version));
    std::map<std::string, std::vector<Annotation>> anns_by_image;
    if (!ann_dir.empty()) {
      for (const io::AnnotationFile& f : io::read_annotation_dir(ann_dir, classes)) {
        anns_by_image[f.image_id] = f.annotations;
      }
    }
    std::map<std::string, std::vector<Detection>> dets_by_image;
    if (!dets_dir.empty()) {
      for (const Detection& d : io::read_detection_dir(dets_dir, classes)) {
        dets_by_image[d.image_id].push_back(d);
      }
    }
    std::set<std::string> ids;
    for (const auto& [id, unused] : anns_by_image) ids.insert(id);
    for (const auto& [id, unused] : dets_by_image) ids.insert(id);

    std::optional<ImageSize> canvas;
    if (!size_text.empty()) canvas = parse_size(size_text);

    const std::vector<std::string> id_list(ids.begin(), ids.end());
    io::parallel_for(id_list.size(), [&](std::size_t i) {
      const std::string& id = id_list[i];
      static const std::vector<Annotation> kNoAnns;
      static const std::vector<Detection> kNoDets;
      const auto ait = anns_by_image.find(id);
      const auto dit = dets_by_image.find(id);
      io::render_svg(std::filesystem::path(out_dir) / (id + ".svg"),
                     ait == anns_by_image.end() ? kNoAnns : ait->second,
                     dit == dets_by_image.end() ? kNoDets : dit->second, classes, canvas);
    });
    std::cerr << "rendered " << id_list.size() << " images\n";
    return 0;
  }
};

struct GenAnnotationsCmd {
  std::string out_dir;
  int images = 8;
  int max_boxes = 12;
  std::string size_text = "1024x1024";
  std::uint64_t seed = 1;
  std::string version = "v1.0";

  int run() const {
    const io::ClassTable classes = io::ClassTable::dota(parse_version(version));
    const std::vector<io::AnnotationFile> files =
        io::synthesize_annotations(seed, images, max_boxes, parse_size(size_text), classes);
    for (const io::AnnotationFile& f : files) {
      io::write_annotations(std::filesystem::path(out_dir) / (f.image_id + ".txt"), f,
                            classes);
    }
    std::cerr << "wrote " << files.size() << " annotation files\n";
    return 0;
  }
};

void add_codec_flags(CLI::App* cmd, CodecConfig& codec, ApeConfig& ape) {
  cmd->add_option("--r1", codec.r1, "ignore-ring shrink ratio");
  cmd->add_option("--r2", codec.r2, "positive-core shrink ratio");
  cmd->add_option("--k0", codec.k0, "pyramid level for short sides in [128, 256)");
  cmd->add_option("--n", codec.n_norm, "regression normalization constant");
  cmd->add_option("--lambda", ape.lambda, "angle-embedding aspect scale");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oriented-box toolkit: rotated-overlap math, anchor-free label grids, "
               "rotated NMS, and rotated-IoU evaluation"};
  app.require_subcommand(1);

  IouCmd iou_cmd;
  CLI::App* iou = app.add_subcommand("iou", "overlap between two boxes");
  iou->add_option("a", iou_cmd.a, "first box: 'cx cy w h theta_deg' (proposal for liiou)")
      ->required();
  iou->add_option("b", iou_cmd.b, "second box: 'cx cy w h theta_deg' (gt for liiou)")
      ->required();
  iou->add_option("--kind", iou_cmd.kind, "iou | liiou")->capture_default_str();
  iou->add_flag("--quad", iou_cmd.quad, "arguments are 'x1 y1 ... x4 y4' quads");

  EncodeCmd encode_cmd;
  CLI::App* enc = app.add_subcommand("encode-targets",
                                     "rasterize DOTA annotations into label-grid archives");
  enc->add_option("--ann", encode_cmd.ann_dir, "annotation directory")->required();
  enc->add_option("--size", encode_cmd.size_text, "image size WxH")->required();
  enc->add_option("--out", encode_cmd.out_dir, "output directory")->required();
  enc->add_option("--classes", encode_cmd.version, "v1.0 | v1.5")->capture_default_str();
  add_codec_flags(enc, encode_cmd.codec, encode_cmd.ape);

  DecodeCmd decode_cmd;
  CLI::App* dec = app.add_subcommand("decode", "decode label-grid archives into detections");
  dec->add_option("--grids", decode_cmd.grids_dir, "grid archive directory")->required();
  dec->add_option("--score-th", decode_cmd.score_threshold, "score threshold")
      ->capture_default_str();
  dec->add_option("--out", decode_cmd.out_dir, "output detection directory")->required();
  dec->add_option("--classes", decode_cmd.version, "v1.0 | v1.5")->capture_default_str();
  add_codec_flags(dec, decode_cmd.codec, decode_cmd.ape);

  NmsCmd nms_cmd;
  CLI::App* nms = app.add_subcommand("nms", "greedy rotated NMS over detection dumps");
  nms->add_option("--in", nms_cmd.in_dir, "input detection directory")->required();
  nms->add_option("--th", nms_cmd.threshold, "IoU suppression threshold")
      ->capture_default_str();
  nms->add_option("--out", nms_cmd.out_dir, "output detection directory")->required();

  MatchStatsCmd match_cmd;
  CLI::App* match = app.add_subcommand("match-stats",
                                       "per-gt positive-proposal counts under iou or liiou");
  match->add_option("--ann", match_cmd.ann_dir, "annotation directory")->required();
  match->add_option("--proposals", match_cmd.proposals_path,
                    "proposal dump file (image_id score x1 y1 ... y4)")
      ->required();
  match->add_option("--kind", match_cmd.kind, "iou | liiou")->capture_default_str();
  match->add_option("--th", match_cmd.threshold, "positive threshold")->capture_default_str();
  match->add_option("--classes", match_cmd.version, "v1.0 | v1.5")->capture_default_str();

  EvalCmd eval_cmd;
  CLI::App* ev = app.add_subcommand("eval", "rotated-IoU mAP over detection dumps");
  ev->add_option("--dets", eval_cmd.dets_dir, "detection directory")->required();
  ev->add_option("--ann", eval_cmd.ann_dir, "annotation directory")->required();
  ev->add_option("--metric", eval_cmd.metric, "voc07 | cont")->capture_default_str();
  ev->add_option("--iou", eval_cmd.iou, "match threshold")->capture_default_str();
  ev->add_option("--overlap", eval_cmd.overlap_method, "rect | quad")->capture_default_str();
  ev->add_option("--classes", eval_cmd.version, "v1.0 | v1.5")->capture_default_str();
  ev->add_option("--json", eval_cmd.json_path, "also write a JSON report here");

  RenderSvgCmd svg_cmd;
  CLI::App* svg = app.add_subcommand("render-svg", "draw annotation/detection quads as SVG");
  svg->add_option("--ann", svg_cmd.ann_dir, "annotation directory");
  svg->add_option("--dets", svg_cmd.dets_dir, "detection directory");
  svg->add_option("--out", svg_cmd.out_dir, "output directory")->required();
  svg->add_option("--size", svg_cmd.size_text, "canvas WxH (default: fit content)");
  svg->add_option("--classes", svg_cmd.version, "v1.0 | v1.5")->capture_default_str();

  GenAnnotationsCmd gen_cmd;
  CLI::App* gen = app.add_subcommand("gen-annotations",
                                     "write a deterministic synthetic annotation corpus");
  gen->add_option("--out", gen_cmd.out_dir, "output directory")->required();
  gen->add_option("--images", gen_cmd.images, "number of images")->capture_default_str();
  gen->add_option("--max-boxes", gen_cmd.max_boxes, "max boxes per image")
      ->capture_default_str();
  gen->add_option("--size", gen_cmd.size_text, "image size WxH")->capture_default_str();
  gen->add_option("--seed", gen_cmd.seed, "generator seed")->capture_default_str();
  gen->add_option("--classes", gen_cmd.version, "v1.0 | v1.5")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*iou) return iou_cmd.run();
    if (*enc) return encode_cmd.run();
    if (*dec) return decode_cmd.run();
    if (*nms) return nms_cmd.run();
    if (*match) return match_cmd.run();
    if (*ev) return eval_cmd.run();
    if (*svg) return svg_cmd.run();
    if (*gen) return gen_cmd.run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
