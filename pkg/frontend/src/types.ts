// Payload shapes of the workbench HTTP API (mirrors the server's models).

export interface RunSummary {
  run_id: string;
  generator_id: string;
  detector_id: string;
  K_nominal: number;
  created_at: string;
  config_digest: string;
  total_images: number;
  total_prompts: number;
}

export interface RunsPage {
  total: number;
  offset: number;
  limit: number;
  items: RunSummary[];
}

export interface ConceptRow {
  label: string;
  count: number;
  p: number;
  sigma: number;
  cv: number;
  classification: string;
}

export interface ConceptsPage {
  total: number;
  offset: number;
  limit: number;
  sort: string;
  filter: string;
  tau: number;
  cv_cutoff: number;
  items: ConceptRow[];
}

export interface PromptHit {
  prompt_id: string;
  text: string;
  image_count: number;
}

export interface EvidenceImage {
  image_id: string;
  image_uri: string | null;
  media_url: string | null;
  boxes: number[][];
  scores: number[];
}

export interface PartnerOut {
  partner: string;
  joint_count: number;
  support: number;
  confidence: number;
  confidence_rev: number;
  lift: number;
}

export interface ConceptDetail {
  run_id: string;
  label: string;
  count: number;
  p: number;
  prompt_hits: PromptHit[];
  evidence: EvidenceImage[];
  partners: PartnerOut[];
}

export interface CoocResponse {
  run_id: string;
  concept: string;
  metric: string;
  k: number;
  min_support: number;
  items: PartnerOut[];
}

export interface DiffRowOut {
  label: string;
  p_a: number;
  p_b: number;
  delta: number;
}

export interface CompareResponse {
  a: string;
  b: string;
  floor: number;
  total: number;
  offset: number;
  limit: number;
  deltas: DiffRowOut[];
  only_a: string[];
  only_b: string[];
}

export interface ApiErrorBody {
  error: { code: string; message: string };
}
