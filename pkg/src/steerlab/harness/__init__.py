"""Campaign configuration, execution, file input and reports."""

from .campaign import ResultSet, analyse, analyze_files, run_campaign, run_trial
from .config import CampaignConfig
from .reports import emit_reports, summarise

__all__ = ["CampaignConfig", "ResultSet", "analyse", "analyze_files", "emit_reports", "run_campaign", "run_trial", "summarise"]
