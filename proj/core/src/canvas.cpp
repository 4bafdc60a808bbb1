#include "canvas.hpp"

#include <cmath>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fails/error.hpp"

namespace fails::draw {

Color parse_hex(const std::string& hex) {
  Color c;
  if (hex.size() == 7 && hex[0] == '#') {
    const unsigned long v = std::stoul(hex.substr(1), nullptr, 16);
    c.r = static_cast<unsigned char>((v >> 16) & 0xff);
    c.g = static_cast<unsigned char>((v >> 8) & 0xff);
    c.b = static_cast<unsigned char>(v & 0xff);
  }
  return c;
}

namespace {

std::string hex(Color c) { return fmt::format("#{:02x}{:02x}{:02x}", c.r, c.g, c.b); }

std::string escape_xml(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

class SvgCanvas final : public Canvas {
 public:
  SvgCanvas(int width, int height) {
    out_ = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
        "viewBox=\"0 0 {0} {1}\" font-family=\"DejaVu Sans, Arial, sans-serif\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"#ffffff\"/>\n",
        width, height);
  }

  void line(Point a, Point b, Color c, double width) override {
    out_ += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" "
        "stroke-width=\"{:.2f}\"/>\n",
        a.x, a.y, b.x, b.y, hex(c), width);
  }

  void polyline(const std::vector<Point>& pts, Color c, double width) override {
    if (pts.empty()) return;
    std::string coords;
    for (const auto& p : pts) coords += fmt::format("{:.2f},{:.2f} ", p.x, p.y);
    coords.pop_back();
    out_ += fmt::format(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.2f}\"/>\n", coords,
        hex(c), width);
  }

  void rect(double x, double y, double w, double h, Color fill) override {
    out_ += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y,
        w, h, hex(fill));
  }

  void frame(double x, double y, double w, double h, Color stroke, double width) override {
    out_ += fmt::format(
        "<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"none\" "
        "stroke=\"{}\" stroke-width=\"{:.2f}\"/>\n",
        x, y, w, h, hex(stroke), width);
  }

  void circle(Point center, double radius, Color c) override {
    out_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\"/>\n",
                        center.x, center.y, radius, hex(c));
  }

  void text(Point at, const std::string& s, double size, Anchor anchor, Color c,
            bool vertical) override {
    const char* a = anchor == Anchor::kStart ? "start" : anchor == Anchor::kMiddle ? "middle" : "end";
    std::string transform;
    if (vertical) transform = fmt::format(" transform=\"rotate(-90 {:.2f} {:.2f})\"", at.x, at.y);
    out_ += fmt::format(
        "<text x=\"{:.2f}\" y=\"{:.2f}\" font-size=\"{:.1f}\" text-anchor=\"{}\" fill=\"{}\"{}>{}"
        "</text>\n",
        at.x, at.y, size, a, hex(c), transform, escape_xml(s));
  }

  std::string finish() override { return out_ + "</svg>\n"; }

 private:
  std::string out_;
};

cv::Scalar bgr(Color c) { return cv::Scalar(c.b, c.g, c.r); }
cv::Point px(Point p) {
  return cv::Point(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)));
}
int thick(double w) { return std::max(1, static_cast<int>(std::lround(w))); }

// Hershey fonts only cover ASCII; anything else becomes '?'.
std::string ascii_only(const std::string& s) {
  std::string out;
  for (unsigned char ch : s) {
    if (ch >= 0x80) {
      if ((ch & 0xc0) != 0x80) out += '?';
    } else {
      out += static_cast<char>(ch);
    }
  }
  return out;
}

class RasterCanvas final : public Canvas {
 public:
  RasterCanvas(int width, int height)
      : img_(height, width, CV_8UC3, cv::Scalar(255, 255, 255)) {}

  void line(Point a, Point b, Color c, double width) override {
    cv::line(img_, px(a), px(b), bgr(c), thick(width), cv::LINE_AA);
  }

  void polyline(const std::vector<Point>& pts, Color c, double width) override {
    if (pts.size() < 2) return;
    std::vector<cv::Point> p;
    for (const auto& q : pts) p.push_back(px(q));
    cv::polylines(img_, p, false, bgr(c), thick(width), cv::LINE_AA);
  }

  void rect(double x, double y, double w, double h, Color fill) override {
    cv::rectangle(img_, px({x, y}), px({x + w, y + h}), bgr(fill), cv::FILLED);
  }

  void frame(double x, double y, double w, double h, Color stroke, double width) override {
    cv::rectangle(img_, px({x, y}), px({x + w, y + h}), bgr(stroke), thick(width), cv::LINE_AA);
  }

  void circle(Point center, double radius, Color c) override {
    cv::circle(img_, px(center), std::max(1, static_cast<int>(std::lround(radius))), bgr(c),
               cv::FILLED, cv::LINE_AA);
  }

  void text(Point at, const std::string& s, double size, Anchor anchor, Color c,
            bool vertical) override {
    const std::string t = ascii_only(s);
    if (t.empty()) return;
    const double scale = size / 30.0;
    const int weight = size >= 20 ? 2 : 1;
    int baseline = 0;
    const cv::Size sz = cv::getTextSize(t, cv::FONT_HERSHEY_SIMPLEX, scale, weight, &baseline);
    double offset = 0;
    if (anchor == Anchor::kMiddle) offset = sz.width / 2.0;
    if (anchor == Anchor::kEnd) offset = sz.width;
    if (!vertical) {
      cv::putText(img_, t, px({at.x - offset, at.y}), cv::FONT_HERSHEY_SIMPLEX, scale, bgr(c),
                  weight, cv::LINE_AA);
      return;
    }
    cv::Mat patch(sz.height + baseline + 2, sz.width + 2, CV_8UC3, cv::Scalar(255, 255, 255));
    cv::putText(patch, t, cv::Point(1, sz.height + 1), cv::FONT_HERSHEY_SIMPLEX, scale, bgr(c),
                weight, cv::LINE_AA);
    cv::Mat rotated;
    cv::rotate(patch, rotated, cv::ROTATE_90_COUNTERCLOCKWISE);
    // After rotation the text reads bottom-to-top; its baseline sits at x.
    const int left = static_cast<int>(std::lround(at.x)) - sz.height - 1;
    const int top = static_cast<int>(std::lround(at.y - (patch.cols - offset)));
    const cv::Rect dst(left, top, rotated.cols, rotated.rows);
    const cv::Rect clipped = dst & cv::Rect(0, 0, img_.cols, img_.rows);
    if (clipped.empty()) return;
    cv::Mat src = rotated(cv::Rect(clipped.x - dst.x, clipped.y - dst.y, clipped.width,
                                   clipped.height));
    cv::Mat region = img_(clipped);
    cv::min(region, src, region);
  }

  std::string finish() override {
    std::vector<uchar> buf;
    bool ok = false;
    try {
      ok = cv::imencode(".png", img_, buf);
    } catch (const cv::Exception& e) {
      throw Error(ErrorCode::kRenderFailure, std::string("PNG encoding failed: ") + e.what());
    }
    if (!ok || buf.empty()) throw Error(ErrorCode::kRenderFailure, "PNG encoding failed");
    return std::string(buf.begin(), buf.end());
  }

 private:
  cv::Mat img_;
};

}  // namespace

std::unique_ptr<Canvas> make_svg_canvas(int width, int height) {
  return std::make_unique<SvgCanvas>(width, height);
}

std::unique_ptr<Canvas> make_raster_canvas(int width, int height) {
  return std::make_unique<RasterCanvas>(width, height);
}

}  // namespace fails::draw
