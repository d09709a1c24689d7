// Contract: client-side controls map 1:1 onto API query parameters.

import { describe, expect, it } from "vitest";

import {
  buildConceptsQuery,
  compareUrl,
  conceptDetailUrl,
  conceptsUrl,
  coocUrl,
  runsUrl,
} from "../src/api";

describe("buildConceptsQuery", () => {
  it("always names the sort key", () => {
    expect(buildConceptsQuery({})).toBe("sort=p");
    expect(buildConceptsQuery({ sort: "cv" })).toBe("sort=cv");
    expect(buildConceptsQuery({ sort: "count" })).toBe("sort=count");
  });

  it("maps the filter box to the filter param", () => {
    expect(buildConceptsQuery({ sort: "p", filter: "wheel" }))
      .toBe("sort=p&filter=wheel");
  });

  it("carries thresholds and pagination verbatim", () => {
    expect(buildConceptsQuery({
      sort: "cv", filter: "sho", tau: 0.05, cvCutoff: 1, offset: 20, limit: 10,
    })).toBe("sort=cv&filter=sho&tau=0.05&cv_cutoff=1&offset=20&limit=10");
  });

  it("omits what the user did not set", () => {
    expect(buildConceptsQuery({ sort: "p", filter: "" })).toBe("sort=p");
  });
});

describe("url builders", () => {
  it("concepts url", () => {
    expect(conceptsUrl("f1", { sort: "cv", filter: "wheel" }))
      .toBe("/runs/f1/concepts?sort=cv&filter=wheel");
  });

  it("escapes run ids and labels", () => {
    expect(conceptDetailUrl("run a", "ski mask"))
      .toBe("/runs/run%20a/concepts/ski%20mask");
  });

  it("cooccurrence url mirrors the metric switcher", () => {
    expect(coocUrl("f1", "man", { k: 2, metric: "support" }))
      .toBe("/runs/f1/cooccurrence?c=man&k=2&metric=support");
    expect(coocUrl("f1", "man", { metric: "lift", minSupport: 0.1 }))
      .toBe("/runs/f1/cooccurrence?c=man&k=10&metric=lift&min_support=0.1");
  });

  it("compare url", () => {
    expect(compareUrl("a", "b", 0.05)).toBe("/compare?a=a&b=b&floor=0.05");
    expect(compareUrl("a", "b")).toBe("/compare?a=a&b=b");
  });

  it("runs url", () => {
    expect(runsUrl()).toBe("/runs");
    expect(runsUrl(10, 5)).toBe("/runs?offset=10&limit=5");
  });
});
