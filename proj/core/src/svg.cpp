// Copyright (c) the obx authors
// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "obx/io.hpp"

namespace obx::io {

namespace {

const char* const kPalette[] = {
    "#e6194b", "#3cb44b", "#ffe119", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#fabebe", "#008080", "#e6beff",
    "#9a6324", "#fffac8", "#800000", "#aaffc3",
};

const char* color_of(int class_id) {
  return kPalette[static_cast<std::size_t>(class_id) % std::size(kPalette)];
}

std::string points_attr(const Quad& quad) {
  std::string out;
  for (Point2 p : quad.vertices()) {
    if (!out.empty()) out += " ";
    out += format_double(p.x) + "," + format_double(p.y);
  }
  return out;
}

}  // namespace

void render_svg(const std::filesystem::path& path, std::span<const Annotation> annotations,
                std::span<const Detection> detections, const ClassTable& classes,
                std::optional<ImageSize> canvas) {
  ImageSize size{1, 1};
  if (canvas) {
    size = *canvas;
  } else {
    double maxx = 1.0, maxy = 1.0;
    auto grow = [&](const Quad& q) {
      for (Point2 p : q.vertices()) {
        maxx = std::max(maxx, p.x);
        maxy = std::max(maxy, p.y);
      }
    };
    for (const Annotation& a : annotations) grow(a.quad);
    for (const Detection& d : detections) grow(d.quad);
    size.width = static_cast<int>(std::ceil(maxx)) + 10;
    size.height = static_cast<int>(std::ceil(maxy)) + 10;
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size.width) +
         "\" height=\"" + std::to_string(size.height) + "\" viewBox=\"0 0 " +
         std::to_string(size.width) + " " + std::to_string(size.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";
  for (const Annotation& a : annotations) {
    svg += "<polygon points=\"" + points_attr(a.quad) + "\" fill=\"none\" stroke=\"" +
           color_of(a.class_id) + "\" stroke-width=\"2\" stroke-dasharray=\"6,4\"" +
           (a.difficult ? " opacity=\"0.5\"" : "") + ">";
    svg += "<title>gt " + classes.name_of(a.class_id) + (a.difficult ? " (difficult)" : "") +
           "</title></polygon>\n";
  }
  for (const Detection& d : detections) {
    svg += "<polygon points=\"" + points_attr(d.quad) + "\" fill=\"none\" stroke=\"" +
           color_of(d.class_id) + "\" stroke-width=\"2\">";
    svg += "<title>" + classes.name_of(d.class_id) + " " + format_double(d.score) +
           "</title></polygon>\n";
  }
  svg += "</svg>\n";
  atomic_write_file(path, svg);
}

}  // namespace obx::io
