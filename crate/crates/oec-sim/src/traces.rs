//! Satellite telemetry ingestion and time-indexed environment queries.
//!
//! All trace files carry timestamps in seconds relative to the trace start;
//! an absolute UTC anchor for solar geometry is supplied separately by the
//! run configuration. Traces are immutable after loading and safe to share
//! across threads.

use std::f64::consts::PI;
use std::path::Path;

use chrono::{Datelike, TimeZone, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Mean spherical Earth radius in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

fn open_csv(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_err(path, 0, e))?)
}

fn csv_err(path: &Path, line: u64, e: csv::Error) -> Error {
    let line = match e.position() {
        Some(p) => p.line(),
        None => line,
    };
    Error::Malformed {
        file: path.display().to_string(),
        line,
        msg: e.to_string(),
    }
}

// ---------------------------------------------------------------------------
// Power trace
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize, Serialize)]
struct PowerRow {
    t_s: f64,
    p_generated_w: f64,
    p_platform_w: f64,
}

/// Time series of generated solar power and satellite upkeep draw.
///
/// Sampling uses zero-order hold: a query at time `t` returns the latest
/// sample with timestamp `<= t`.
#[derive(Debug, Clone, Default)]
pub struct PowerTrace {
    samples: Vec<(f64, f64, f64)>,
}

impl PowerTrace {
    pub fn from_samples(samples: Vec<(f64, f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyTrace);
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::NonMonotonicTime {
                    prev: w[0].0,
                    t: w[1].0,
                });
            }
        }
        if let Some(s) = samples.iter().find(|s| s.1 < 0.0 || s.2 < 0.0) {
            return Err(Error::OutOfRange(format!(
                "negative power at t={}: generated {} platform {}",
                s.0, s.1, s.2
            )));
        }
        Ok(PowerTrace { samples })
    }

    /// Loads a power trace CSV with header `t_s,p_generated_w,p_platform_w`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = open_csv(path)?;
        let mut samples = Vec::new();
        for row in rdr.deserialize() {
            let row: PowerRow = row.map_err(|e| csv_err(path, 0, e))?;
            samples.push((row.t_s, row.p_generated_w, row.p_platform_w));
        }
        Self::from_samples(samples)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path.as_ref())?;
        for &(t_s, p_generated_w, p_platform_w) in &self.samples {
            wtr.serialize(PowerRow {
                t_s,
                p_generated_w,
                p_platform_w,
            })
            .map_err(|e| csv_err(path.as_ref(), 0, e))?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Returns `(p_generated, p_platform)` at `t` via zero-order hold.
    pub fn sample(&self, t: f64) -> Result<(f64, f64)> {
        let start = self.start();
        if t < start {
            return Err(Error::BeforeStart { t, start });
        }
        let idx = self.samples.partition_point(|s| s.0 <= t);
        let s = self.samples[idx - 1];
        Ok((s.1, s.2))
    }

    pub fn start(&self) -> f64 {
        self.samples[0].0
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_generated_w(&self) -> f64 {
        self.samples.iter().map(|s| s.1).sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean_platform_w(&self) -> f64 {
        self.samples.iter().map(|s| s.2).sum::<f64>() / self.samples.len() as f64
    }
}

/// Loads a power trace from a CSV file. See [`PowerTrace::load`].
pub fn load_power_trace(path: impl AsRef<Path>) -> Result<PowerTrace> {
    PowerTrace::load(path)
}

/// Zero-order-hold sample of a power trace. See [`PowerTrace::sample`].
pub fn sample_power(trace: &PowerTrace, t: f64) -> Result<(f64, f64)> {
    trace.sample(t)
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize, Serialize)]
struct TrajectoryRow {
    t_s: f64,
    lat_deg: f64,
    lon_deg: f64,
    alt_km: f64,
}

/// Sub-satellite ground track with altitude, ordered by time.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    points: Vec<(f64, f64, f64, f64)>,
}

impl Trajectory {
    pub fn from_points(points: Vec<(f64, f64, f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyTrace);
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::NonMonotonicTime {
                    prev: w[0].0,
                    t: w[1].0,
                });
            }
        }
        for &(t, lat, lon, alt) in &points {
            if !(-90.0..=90.0).contains(&lat) {
                return Err(Error::OutOfRange(format!("latitude {lat} at t={t}")));
            }
            if !(-180.0..=180.0).contains(&lon) {
                return Err(Error::OutOfRange(format!("longitude {lon} at t={t}")));
            }
            if alt <= 0.0 {
                return Err(Error::OutOfRange(format!("altitude {alt} km at t={t}")));
            }
        }
        Ok(Trajectory { points })
    }

    /// Loads a trajectory CSV with header `t_s,lat_deg,lon_deg,alt_km`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = open_csv(path)?;
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let row: TrajectoryRow = row.map_err(|e| csv_err(path, 0, e))?;
            points.push((row.t_s, row.lat_deg, row.lon_deg, row.alt_km));
        }
        Self::from_points(points)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path.as_ref())?;
        for &(t_s, lat_deg, lon_deg, alt_km) in &self.points {
            wtr.serialize(TrajectoryRow {
                t_s,
                lat_deg,
                lon_deg,
                alt_km,
            })
            .map_err(|e| csv_err(path.as_ref(), 0, e))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.points[0].0
    }

    pub fn end(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn points(&self) -> &[(f64, f64, f64, f64)] {
        &self.points
    }

    /// Interpolated `(lat, lon, alt)` at time `t`.
    ///
    /// Positions are interpolated on the unit sphere (normalized lerp of the
    /// ground-point unit vectors) so tracks crossing the antimeridian stay
    /// well formed; altitude is interpolated linearly.
    pub fn position_at(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (start, end) = (self.start(), self.end());
        if t < start || t > end {
            return Err(Error::OutsideSpan { t, start, end });
        }
        let idx = self.points.partition_point(|p| p.0 <= t);
        if idx == self.points.len() {
            let p = self.points[idx - 1];
            return Ok((p.1, p.2, p.3));
        }
        let a = self.points[idx - 1];
        let b = self.points[idx];
        let f = (t - a.0) / (b.0 - a.0);
        let va = unit_vector(a.1, a.2);
        let vb = unit_vector(b.1, b.2);
        let v = [
            va[0] + f * (vb[0] - va[0]),
            va[1] + f * (vb[1] - va[1]),
            va[2] + f * (vb[2] - va[2]),
        ];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let lat = (v[2] / norm).asin().to_degrees();
        let lon = v[1].atan2(v[0]).to_degrees();
        let alt = a.3 + f * (b.3 - a.3);
        Ok((lat, lon, alt))
    }
}

fn unit_vector(lat_deg: f64, lon_deg: f64) -> [f64; 3] {
    let lat = lat_deg.to_radians();
    let lon = lon_deg.to_radians();
    [lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin()]
}

// ---------------------------------------------------------------------------
// Ground station and contact schedule
// ---------------------------------------------------------------------------

/// A ground station with an elevation mask.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundStation {
    pub name: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
    #[serde(default = "default_min_elevation")]
    pub min_elevation_deg: f64,
}

fn default_min_elevation() -> f64 {
    10.0
}

impl GroundStation {
    pub fn new(name: impl Into<String>, lat_deg: f64, lon_deg: f64) -> Self {
        GroundStation {
            name: name.into(),
            lat_deg,
            lon_deg,
            min_elevation_deg: default_min_elevation(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..90.0).contains(&self.min_elevation_deg) {
            return Err(Error::OutOfRange(format!(
                "min_elevation {} not in [0, 90)",
                self.min_elevation_deg
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ContactRow {
    start_s: f64,
    end_s: f64,
}

/// Ordered, non-overlapping downlink contact windows.
#[derive(Debug, Clone, Default)]
pub struct ContactSchedule {
    windows: Vec<(f64, f64)>,
}

impl ContactSchedule {
    pub fn empty() -> Self {
        ContactSchedule::default()
    }

    pub fn from_windows(windows: Vec<(f64, f64)>) -> Result<Self> {
        for &(s, e) in &windows {
            if s >= e {
                return Err(Error::OutOfRange(format!("window [{s}, {e}] not increasing")));
            }
        }
        for w in windows.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(Error::OutOfRange(format!(
                    "windows overlap or are unordered near t={}",
                    w[1].0
                )));
            }
        }
        Ok(ContactSchedule { windows })
    }

    /// Loads a contact schedule CSV with header `start_s,end_s`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = open_csv(path)?;
        let mut windows = Vec::new();
        for row in rdr.deserialize() {
            let row: ContactRow = row.map_err(|e| csv_err(path, 0, e))?;
            windows.push((row.start_s, row.end_s));
        }
        Self::from_windows(windows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path.as_ref())?;
        for &(start_s, end_s) in &self.windows {
            wtr.serialize(ContactRow { start_s, end_s })
                .map_err(|e| csv_err(path.as_ref(), 0, e))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn windows(&self) -> &[(f64, f64)] {
        &self.windows
    }

    pub fn contains(&self, t: f64) -> bool {
        let idx = self.windows.partition_point(|w| w.0 <= t);
        idx > 0 && t < self.windows[idx - 1].1
    }

    pub fn total_duration(&self) -> f64 {
        self.windows.iter().map(|w| w.1 - w.0).sum()
    }

    /// Fraction of `span_s` spent in contact.
    pub fn contact_fraction(&self, span_s: f64) -> f64 {
        if span_s <= 0.0 {
            0.0
        } else {
            self.total_duration() / span_s
        }
    }
}

// ---------------------------------------------------------------------------
// Solar geometry
// ---------------------------------------------------------------------------

/// Solar elevation angle in degrees at a ground point and UTC instant.
///
/// Low-precision analytic approximation (solar declination plus equation of
/// time, NOAA-style); good to about a degree, which is all the day/night
/// split needs.
pub fn solar_elevation(lat_deg: f64, lon_deg: f64, t_unix_s: f64) -> f64 {
    let dt = Utc
        .timestamp_opt(t_unix_s.floor() as i64, 0)
        .single()
        .unwrap_or_else(|| Utc.timestamp_opt(0, 0).single().unwrap());
    let frac_s = t_unix_s - t_unix_s.floor();
    let doy = dt.ordinal() as f64;
    let hour = dt.hour() as f64
        + dt.minute() as f64 / 60.0
        + (dt.second() as f64 + frac_s) / 3600.0;

    // Fractional year in radians.
    let gamma = 2.0 * PI / 365.0 * (doy - 1.0 + (hour - 12.0) / 24.0);

    // Equation of time (minutes) and solar declination (radians).
    let eqtime = 229.18
        * (0.000075 + 0.001868 * gamma.cos()
            - 0.032077 * gamma.sin()
            - 0.014615 * (2.0 * gamma).cos()
            - 0.040849 * (2.0 * gamma).sin());
    let decl = 0.006918 - 0.399912 * gamma.cos() + 0.070257 * gamma.sin()
        - 0.006758 * (2.0 * gamma).cos()
        + 0.000907 * (2.0 * gamma).sin()
        - 0.002697 * (3.0 * gamma).cos()
        + 0.00148 * (3.0 * gamma).sin();

    // True solar time in minutes, then hour angle in degrees.
    let time_offset = eqtime + 4.0 * lon_deg;
    let tst = hour * 60.0 + time_offset;
    let ha = (tst / 4.0 - 180.0).to_radians();

    let lat = lat_deg.to_radians();
    let cos_zenith = lat.sin() * decl.sin() + lat.cos() * decl.cos() * ha.cos();
    90.0 - cos_zenith.clamp(-1.0, 1.0).acos().to_degrees()
}

/// Elevation of a satellite above a station's local horizon, in degrees.
///
/// Spherical-Earth line-of-sight geometry from geodetic-free lat/lon/alt:
/// `sin(elev) = (rho . station_up) / |rho|` with `rho` the station-to-
/// satellite range vector.
pub fn station_elevation(
    station: &GroundStation,
    sat_lat_deg: f64,
    sat_lon_deg: f64,
    sat_alt_km: f64,
) -> f64 {
    let up = unit_vector(station.lat_deg, station.lon_deg);
    let s = [
        up[0] * EARTH_RADIUS_KM,
        up[1] * EARTH_RADIUS_KM,
        up[2] * EARTH_RADIUS_KM,
    ];
    let pu = unit_vector(sat_lat_deg, sat_lon_deg);
    let r = EARTH_RADIUS_KM + sat_alt_km;
    let p = [pu[0] * r, pu[1] * r, pu[2] * r];
    let rho = [p[0] - s[0], p[1] - s[1], p[2] - s[2]];
    let norm = (rho[0] * rho[0] + rho[1] * rho[1] + rho[2] * rho[2]).sqrt();
    if norm == 0.0 {
        return 90.0;
    }
    let sin_el = (rho[0] * up[0] + rho[1] * up[1] + rho[2] * up[2]) / norm;
    sin_el.clamp(-1.0, 1.0).asin().to_degrees()
}

/// Derives contact windows as maximal intervals where the satellite sits at
/// or above the station's elevation mask.
///
/// Window bounds are quantized to trajectory sample times. An explicit
/// schedule file, when available, should be preferred over derivation.
pub fn derive_contacts(traj: &Trajectory, station: &GroundStation) -> ContactSchedule {
    let mut windows = Vec::new();
    let mut open: Option<f64> = None;
    let mut last_t = traj.start();
    for &(t, lat, lon, alt) in traj.points() {
        let visible = station_elevation(station, lat, lon, alt) >= station.min_elevation_deg;
        match (open, visible) {
            (None, true) => open = Some(t),
            (Some(start), false) => {
                windows.push((start, last_t));
                open = None;
            }
            _ => {}
        }
        last_t = t;
    }
    if let Some(start) = open {
        windows.push((start, last_t));
    }
    // Zero-length windows (single visible sample) are kept as epsilon spans.
    let windows = windows
        .into_iter()
        .map(|(s, e)| if s == e { (s, s + 1e-9) } else { (s, e) })
        .collect();
    ContactSchedule::from_windows(windows).expect("derived windows are ordered")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_parses_representative_row() {
        let f = write_tmp("t_s,p_generated_w,p_platform_w\n0,15.59,12.64\n");
        let trace = PowerTrace::load(f.path()).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.sample(0.0).unwrap(), (15.59, 12.64));
    }

    #[test]
    fn load_rejects_empty_file() {
        let f = write_tmp("t_s,p_generated_w,p_platform_w\n");
        let err = PowerTrace::load(f.path()).unwrap_err();
        assert!(matches!(err, Error::EmptyTrace), "{err}");
        assert_eq!(err.to_string(), "empty trace");
    }

    #[test]
    fn load_rejects_non_monotonic_rows() {
        let f = write_tmp("t_s,p_generated_w,p_platform_w\n5,1,1\n3,1,1\n");
        let err = PowerTrace::load(f.path()).unwrap_err();
        assert!(matches!(err, Error::NonMonotonicTime { .. }), "{err}");
    }

    #[test]
    fn load_rejects_malformed_row() {
        let f = write_tmp("t_s,p_generated_w,p_platform_w\n0,abc,1\n");
        let err = PowerTrace::load(f.path()).unwrap_err();
        assert!(matches!(err, Error::Malformed { .. }), "{err}");
    }

    #[test]
    fn sample_holds_latest_value() {
        let trace =
            PowerTrace::from_samples(vec![(0.0, 10.0, 5.0), (1.0, 20.0, 5.0)]).unwrap();
        assert_eq!(trace.sample(0.4).unwrap(), (10.0, 5.0));
        // Boundary takes the newer sample.
        assert_eq!(trace.sample(1.0).unwrap(), (20.0, 5.0));
        // Past the end the last value holds.
        assert_eq!(trace.sample(5.0).unwrap(), (20.0, 5.0));
        assert!(matches!(
            trace.sample(-1.0),
            Err(Error::BeforeStart { .. })
        ));
    }

    #[test]
    fn trajectory_validates_ranges() {
        assert!(Trajectory::from_points(vec![(0.0, 95.0, 0.0, 500.0)]).is_err());
        assert!(Trajectory::from_points(vec![(0.0, 0.0, 200.0, 500.0)]).is_err());
        assert!(Trajectory::from_points(vec![(0.0, 0.0, 0.0, -1.0)]).is_err());
        assert!(Trajectory::from_points(vec![]).is_err());
    }

    #[test]
    fn trajectory_interpolates_across_antimeridian() {
        let traj = Trajectory::from_points(vec![
            (0.0, 0.0, 179.0, 500.0),
            (10.0, 0.0, -179.0, 500.0),
        ])
        .unwrap();
        let (lat, lon, alt) = traj.position_at(5.0).unwrap();
        assert_relative_eq!(lat, 0.0, epsilon = 1e-9);
        assert!(
            (lon - 180.0).abs() < 1e-6 || (lon + 180.0).abs() < 1e-6,
            "lon {lon}"
        );
        assert_relative_eq!(alt, 500.0);
        assert!(traj.position_at(11.0).is_err());
    }

    #[test]
    fn solar_elevation_equinox_noon_near_overhead() {
        // 2023-03-21 12:00 UTC at (0, 0): within a couple degrees of zenith.
        let t = Utc
            .with_ymd_and_hms(2023, 3, 21, 12, 0, 0)
            .unwrap()
            .timestamp() as f64;
        let el = solar_elevation(0.0, 0.0, t);
        assert!(el > 88.0, "elevation {el}");
        let midnight = Utc
            .with_ymd_and_hms(2023, 3, 21, 0, 0, 0)
            .unwrap()
            .timestamp() as f64;
        let el = solar_elevation(0.0, 0.0, midnight);
        assert!(el < -88.0, "elevation {el}");
    }

    #[test]
    fn solar_elevation_polar_day() {
        // Near the pole in mid June the sun never sets.
        let base = Utc
            .with_ymd_and_hms(2023, 6, 15, 0, 0, 0)
            .unwrap()
            .timestamp() as f64;
        for h in 0..24 {
            let el = solar_elevation(89.9, 0.0, base + h as f64 * 3600.0);
            assert!(el > 0.0, "hour {h}: elevation {el}");
        }
    }

    #[test]
    fn solar_elevation_antipodal_antisymmetry() {
        let t = Utc
            .with_ymd_and_hms(2023, 5, 1, 7, 13, 0)
            .unwrap()
            .timestamp() as f64;
        for &(lat, lon) in &[(12.0, 34.0), (-55.0, 170.0), (71.0, -120.0)] {
            let a = solar_elevation(lat, lon, t);
            let anti_lon = if lon > 0.0 { lon - 180.0 } else { lon + 180.0 };
            let b = solar_elevation(-lat, anti_lon, t);
            assert!((a + b).abs() <= 2.0, "({lat},{lon}): {a} vs {b}");
        }
    }

    #[test]
    fn derive_contacts_overhead_point() {
        let station = GroundStation::new("st", 10.0, 20.0);
        let traj = Trajectory::from_points(vec![
            (0.0, 10.0, -160.0, 500.0),
            (100.0, 10.0, 20.0, 500.0),
            (200.0, 10.0, -160.0, 500.0),
        ])
        .unwrap();
        let sched = derive_contacts(&traj, &station);
        assert_eq!(sched.windows().len(), 1);
        assert!(sched.contains(100.0));
    }

    #[test]
    fn derive_contacts_antipode_is_empty() {
        let station = GroundStation::new("st", 10.0, 20.0);
        let traj = Trajectory::from_points(vec![
            (0.0, -10.0, -160.0, 500.0),
            (100.0, -10.0, -160.0, 500.0),
        ])
        .unwrap();
        let sched = derive_contacts(&traj, &station);
        assert!(sched.windows().is_empty());
    }

    #[test]
    fn contact_schedule_rejects_overlap() {
        assert!(ContactSchedule::from_windows(vec![(0.0, 10.0), (5.0, 15.0)]).is_err());
        assert!(ContactSchedule::from_windows(vec![(10.0, 5.0)]).is_err());
        let s = ContactSchedule::from_windows(vec![(0.0, 10.0), (10.0, 15.0)]).unwrap();
        assert!(s.contains(0.0));
        assert!(!s.contains(15.0));
        assert_relative_eq!(s.total_duration(), 15.0);
    }
}
