__author__ = 'Agustin Damian Martinez'
__version__ = '0.1.0'
__credits__ = 'None'

from .errors import (
	MilkFeverError,
	ValidationError,
	ParameterError,
	SurveyError,
	RowError,
	ComputationError,
	SeparationError,
	RankDeficiencyError,
	ConvergenceError,
	ReportIOError,
)

from .helpers import (
	CRORE,
	LAKH,
	to_unit,
)

from .losses import (
	LACTATION_DAYS,
	RateSummary,
	GroupParameters,
	LossBreakdown,
	PreventionSummary,
	derive_rates,
	derive_lactation_yield,
	milk_production_loss,
	mortality_loss,
	milk_value_loss,
	treatment_cost,
	total_economic_loss,
	pooled_parameters,
	aggregate,
	prevention_economics,
)

from .surplus import (
	MarketParameters,
	SurplusResult,
	AdoptionPoint,
	counterfactual_supply,
	supply_shift_k,
	price_reduction_z,
	producer_surplus,
	efficiency_gain,
	pooled_market,
	adoption_sweep,
	sensitivity_sweep,
)

from .incidence import (
	Species,
	SurveyRecord,
	IncidenceSummary,
	summarize_incidence,
	describe_sample,
	sample_group,
)

from .logit import (
	FactorDesign,
	LogitFit,
	MarginEstimate,
	fit_logit,
	predictive_margins,
)

from .power import (
	PowerSpec,
	minimum_detectable_effect,
	required_sample_size,
	quantiles_from_levels,
	simulate_power,
)

from .oracle import (
	SimConfig,
	SimResult,
	simulate_herd,
	compare_to_closed_form,
)

from .symbolic import (
	symbolic
)

from .ingest import (
	ParameterDocument,
	read_parameters,
	read_survey_csv,
	load_census,
)

from .reports import (
	ResultBundle,
	build_bundle,
	emit_reports,
	read_results_csv,
)

__all__ = [
	'MilkFeverError', 'ValidationError', 'ParameterError', 'SurveyError', 'RowError',
	'ComputationError', 'SeparationError', 'RankDeficiencyError', 'ConvergenceError',
	'ReportIOError',
	'CRORE', 'LAKH', 'to_unit',
	'LACTATION_DAYS', 'RateSummary', 'GroupParameters', 'LossBreakdown', 'PreventionSummary',
	'derive_rates', 'derive_lactation_yield', 'milk_production_loss', 'mortality_loss',
	'milk_value_loss', 'treatment_cost', 'total_economic_loss', 'pooled_parameters',
	'aggregate', 'prevention_economics',
	'MarketParameters', 'SurplusResult', 'AdoptionPoint', 'counterfactual_supply',
	'supply_shift_k', 'price_reduction_z', 'producer_surplus', 'efficiency_gain',
	'pooled_market', 'adoption_sweep', 'sensitivity_sweep',
	'Species', 'SurveyRecord', 'IncidenceSummary', 'summarize_incidence', 'describe_sample',
	'sample_group',
	'FactorDesign', 'LogitFit', 'MarginEstimate', 'fit_logit', 'predictive_margins',
	'PowerSpec', 'minimum_detectable_effect', 'required_sample_size', 'quantiles_from_levels',
	'simulate_power',
	'SimConfig', 'SimResult', 'simulate_herd', 'compare_to_closed_form',
	'symbolic',
	'ParameterDocument', 'read_parameters', 'read_survey_csv', 'load_census',
	'ResultBundle', 'build_bundle', 'emit_reports', 'read_results_csv',
	]
