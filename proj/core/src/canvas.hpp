#pragma once

#include <memory>
#include <string>
#include <vector>

namespace fails::draw {

struct Color {
  unsigned char r = 0, g = 0, b = 0;
};

Color parse_hex(const std::string& hex);

enum class Anchor { kStart, kMiddle, kEnd };

struct Point {
  double x = 0, y = 0;
};

// Minimal drawing surface. Coordinates are pixels, origin top-left.
class Canvas {
 public:
  virtual ~Canvas() = default;
  virtual void line(Point a, Point b, Color c, double width) = 0;
  virtual void polyline(const std::vector<Point>& pts, Color c, double width) = 0;
  virtual void rect(double x, double y, double w, double h, Color fill) = 0;
  virtual void frame(double x, double y, double w, double h, Color stroke, double width) = 0;
  virtual void circle(Point center, double radius, Color c) = 0;
  // `vertical` rotates the text 90 degrees counter-clockwise around (x, y).
  virtual void text(Point at, const std::string& s, double size, Anchor anchor, Color c,
                    bool vertical = false) = 0;
  virtual std::string finish() = 0;
};

std::unique_ptr<Canvas> make_svg_canvas(int width, int height);
std::unique_ptr<Canvas> make_raster_canvas(int width, int height);

}  // namespace fails::draw
