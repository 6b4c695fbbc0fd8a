"""Attribution services: ingestion, aggregation, engines, reporting, synthesis."""
