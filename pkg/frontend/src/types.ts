// Response shapes of the medreview HTTP API (see docs/file-formats.md in the
// repository root). The UI performs no clinical computation: every number it
// shows comes from one of these fields.

export type RuleKind = "STOPP" | "START";
export type DosageStatus = "under" | "within" | "over" | "no_rule" | "unit_mismatch";
export type Arm = "without" | "with";

export interface Dose {
  value: number;
  unit: string;
}

export interface InterventionTemplate {
  action: "deprescribe" | "prescribe" | "replace" | "change_dose" | "lab_test";
  target_atc?: string;
  replacement_atc?: string;
  dose_direction?: "increase" | "decrease";
  lab_loinc?: string;
}

export interface TriggerBinding {
  predicate: string;
  kind: string;
  matched: string;
  atc?: string;
}

export interface DetectedProblem {
  rule_id: string;
  kind: RuleKind;
  problem_text: string;
  severity_hint: number;
  suggestion: InterventionTemplate;
  trigger_bindings: TriggerBinding[];
}

export interface DosageAssessment {
  atc: string;
  drug_name: string | null;
  current_daily_dose: string;
  recommended_min: string | null;
  recommended_max: string | null;
  status: DosageStatus;
}

export interface EffectContributor {
  atc: string;
  frequency: number;
  severity: number;
}

export interface EffectCategory {
  category: string;
  combined_probability: number;
  max_severity: number;
  contributors: EffectContributor[];
}

export interface GraphNode {
  atc: string;
  name: string | null;
}

export interface GraphEdge {
  drug_a: string;
  drug_b: string;
  severity_level: number;
  mechanism: string;
  source_a: string;
  source_b: string;
}

export interface AnalysisReport {
  kb_version: string;
  patient_id: string;
  problems: DetectedProblem[];
  dosages: DosageAssessment[];
  effects: { categories: EffectCategory[] };
  interactions: { nodes: GraphNode[]; edges: GraphEdge[] };
}

export interface Intervention {
  action: InterventionTemplate["action"];
  target_atc?: string;
  new_atc?: string;
  new_daily_dose?: Dose;
  lab_loinc?: string;
  free_comment?: string;
}

export interface MedicationLine {
  atc: string;
  daily_dose: Dose;
  duration_days?: number;
  indication?: string;
}

export interface LabResult {
  loinc: string;
  value: number;
  unit: string;
  observed_days_ago: number;
}

export interface PatientRecord {
  id: string;
  age: number;
  sex: string;
  weight_kg?: number;
  medications: MedicationLine[];
  conditions: string[];
  labs: LabResult[];
  interview?: string;
}

export interface ReviewSession {
  session_id: string;
  patient_id: string;
  baseline: PatientRecord;
  interventions: Intervention[];
  elapsed_seconds: number;
  finalized: boolean;
  created: string;
  updated: string;
}

export interface DosageDelta {
  atc: string;
  before: DosageStatus | null;
  after: DosageStatus | null;
}

export interface EffectDelta {
  category: string;
  before: number;
  after: number;
}

export interface ComparisonReport {
  problems_resolved: DetectedProblem[];
  problems_persisting: DetectedProblem[];
  problems_new: DetectedProblem[];
  dosage_deltas: DosageDelta[];
  effect_deltas: EffectDelta[];
  interactions_added: GraphEdge[];
  interactions_removed: GraphEdge[];
  before: AnalysisReport;
  after: AnalysisReport;
}

export interface CaseOrderEntry {
  passage: number;
  case_id: string;
  arm: Arm;
}
