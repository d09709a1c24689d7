import { describe, expect, it } from "vitest";

import { boxToCssRect, conceptColor } from "../src/overlay";

describe("box overlays", () => {
  it("converts normalized boxes to percent rects", () => {
    expect(boxToCssRect([0.25, 0.1, 0.75, 0.9])).toEqual({
      left: "25.00%",
      top: "10.00%",
      width: "50.00%",
      height: "80.00%",
    });
  });

  it("full-image box covers the frame", () => {
    expect(boxToCssRect([0, 0, 1, 1])).toEqual({
      left: "0.00%", top: "0.00%", width: "100.00%", height: "100.00%",
    });
  });
});

describe("concept colors", () => {
  it("is stable per label and differs across labels", () => {
    expect(conceptColor("shoes")).toBe(conceptColor("shoes"));
    expect(conceptColor("shoes")).not.toBe(conceptColor("man"));
    expect(conceptColor("shoes")).toMatch(/^hsl\(\d+, 75%, 45%\)$/);
  });
});
